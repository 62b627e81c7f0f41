#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <utility>

namespace netsemi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Operator norm induced by the max-norm: the largest absolute row sum.
inline double inf_norm(const Matrix& a)
{
    if (a.size() == 0) {
        return 0.0;
    }
    return a.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Numerical rank by Gaussian elimination with full pivoting.
///
/// A pivot counts as nonzero when it exceeds `relative_tolerance` times the
/// largest entry magnitude of the input matrix.
inline std::size_t rank(Matrix a, double relative_tolerance = 1e-10)
{
    const Eigen::Index rows = a.rows();
    const Eigen::Index cols = a.cols();
    if (a.size() == 0) {
        return 0;
    }
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        return 0;
    }
    const double threshold = relative_tolerance * scale;

    std::size_t r = 0;
    for (Eigen::Index k = 0; k < std::min(rows, cols); ++k) {
        Eigen::Index pr = 0;
        Eigen::Index pc = 0;
        const double pivot = a.bottomRightCorner(rows - k, cols - k).cwiseAbs().maxCoeff(&pr, &pc);
        if (pivot <= threshold) {
            break;
        }
        a.row(k).swap(a.row(k + pr));
        a.col(k).swap(a.col(k + pc));
        for (Eigen::Index i = k + 1; i < rows; ++i) {
            const double factor = a(i, k) / a(k, k);
            a.row(i).tail(cols - k) -= factor * a.row(k).tail(cols - k);
        }
        ++r;
    }
    return r;
}

} // namespace netsemi
