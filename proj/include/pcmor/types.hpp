#ifndef PCMOR_TYPES_HPP
#define PCMOR_TYPES_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace pcmor {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

} // namespace pcmor

#endif
