#pragma once

// Dense matrix substrate: minimum-norm least squares, numerical rank and
// an incrementally grown orthonormal basis used by the builder's fast refit.

#include "dscn/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace dscn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// nullopt selects the automatic tolerance max(rows, cols) * eps * sigma_max.
using rank_tolerance = std::optional<double>;
inline constexpr rank_tolerance auto_tolerance = std::nullopt;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& a)
{
    return a.derived().array().isFinite().all();
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& a, const char* what)
{
    if (!all_finite(a))
        throw invalid_input(std::string(what) + " contains non-finite entries");
}

template <typename Derived>
double frobenius_norm(const Eigen::MatrixBase<Derived>& a)
{
    require_finite(a, "frobenius_norm operand");
    return a.norm();
}

/// Minimum-norm solution of min ||H beta - T||_F (pseudo-inverse semantics).
inline Matrix least_squares(const Matrix& H, const Matrix& T)
{
    if (H.rows() != T.rows())
        throw dimension_error("least_squares: H has " + std::to_string(H.rows()) +
                              " rows but T has " + std::to_string(T.rows()));
    if (H.rows() < 1 || H.cols() < 1 || T.cols() < 1)
        throw invalid_input("least_squares: empty operand");
    require_finite(H, "least_squares H");
    require_finite(T, "least_squares T");

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    const auto n = static_cast<double>(std::max(H.rows(), H.cols()));
    cod.setThreshold(n * std::numeric_limits<double>::epsilon());
    cod.compute(H);
    return cod.solve(T);
}

/// Number of singular values strictly greater than the tolerance.
inline Eigen::Index numerical_rank(const Matrix& A, rank_tolerance tol = auto_tolerance)
{
    if (tol && *tol < 0.0)
        throw invalid_input("numerical_rank: negative tolerance");
    require_finite(A, "numerical_rank operand");
    if (A.size() == 0)
        return 0;

    const Vector sv = Eigen::BDCSVD<Matrix>(A).singularValues();
    const double threshold = tol ? *tol
                                 : static_cast<double>(std::max(A.rows(), A.cols())) *
                                       std::numeric_limits<double>::epsilon() * sv(0);
    return static_cast<Eigen::Index>((sv.array() > threshold).count());
}

/// Orthonormal basis of span(columns appended so far), grown by classical
/// Gram-Schmidt with one reorthogonalization pass. Columns whose component
/// outside the current span is below `dependence_tol * ||h||` are reported
/// as dependent and not stored.
class orthogonal_basis {
public:
    explicit orthogonal_basis(Eigen::Index rows, Eigen::Index capacity = 0,
                              double dependence_tol = 1e-10)
        : q_(rows, std::max<Eigen::Index>(capacity, 1))
        , tol_(dependence_tol)
    {}

    Eigen::Index rows() const noexcept { return q_.rows(); }
    Eigen::Index rank() const noexcept { return rank_; }

    auto basis() const { return q_.leftCols(rank_); }

    /// Appends h; on success returns the new unit column (so callers can
    /// deflate residuals), otherwise nullopt for a dependent column.
    std::optional<Vector> append(const Vector& h)
    {
        if (h.size() != q_.rows())
            throw dimension_error("orthogonal_basis::append: length mismatch");
        const double h_norm = h.norm();
        if (h_norm == 0.0)
            return std::nullopt;

        Vector q = h;
        for (int pass = 0; pass < 2 && rank_ > 0; ++pass) {
            const Vector coeff = basis().transpose() * q;
            q.noalias() -= basis() * coeff;
        }
        const double q_norm = q.norm();
        if (q_norm <= tol_ * h_norm)
            return std::nullopt;
        q /= q_norm;

        if (rank_ == q_.cols())
            q_.conservativeResize(Eigen::NoChange, 2 * q_.cols());
        q_.col(rank_++) = q;
        return q;
    }

private:
    Matrix q_;
    Eigen::Index rank_ = 0;
    double tol_;
};

} // namespace dscn
