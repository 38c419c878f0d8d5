#include "rankone/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "rankone/error.hpp"

namespace rankone {

namespace {

void fix_sign(SingularTriple& t)
{
    for (Eigen::Index k = 0; k < t.u.size(); ++k) {
        if (std::abs(t.u[k]) > 1e-12) {
            if (t.u[k] < 0.0) {
                t.u = -t.u;
                t.v = -t.v;
            }
            return;
        }
    }
}

// Completes a triple from the Gram-side unit vector w. `left` means w lives
// in the row space of A (w = u), otherwise w = v.
SingularTriple complete(const Matrix& a, const Vector& w, bool left)
{
    SingularTriple t;
    if (left) {
        Vector y = a.transpose() * w;
        t.sigma = y.norm();
        t.u = w;
        t.v = t.sigma > 0.0 ? Vector(y / t.sigma) : Vector::Unit(a.cols(), 0);
    } else {
        Vector y = a * w;
        t.sigma = y.norm();
        t.v = w;
        t.u = t.sigma > 0.0 ? Vector(y / t.sigma) : Vector::Unit(a.rows(), 0);
    }
    return t;
}

Vector default_start(const Matrix& a, bool left)
{
    // The largest column (left) or row (right) of A is never annihilated by
    // the transpose, so the first Rayleigh quotient is positive.
    Eigen::Index best = 0;
    if (left) {
        a.colwise().squaredNorm().maxCoeff(&best);
        return a.col(best).normalized();
    }
    a.rowwise().squaredNorm().maxCoeff(&best);
    return a.row(best).transpose().normalized();
}

SingularTriple power_iteration(const Matrix& a, bool left, const SvdOptions& opt,
                               const std::optional<Vector>& start)
{
    const Eigen::Index n = left ? a.rows() : a.cols();
    Vector w;
    if (start && start->size() == n && start->norm() > 0.0)
        w = start->normalized();
    else
        w = default_start(a, left);

    auto apply_half = [&](const Vector& x) -> Vector {
        return left ? Vector(a.transpose() * x) : Vector(a * x);
    };
    auto apply_other = [&](const Vector& y) -> Vector {
        return left ? Vector(a * y) : Vector(a.transpose() * y);
    };

    Vector y = apply_half(w);
    if (y.squaredNorm() == 0.0) {
        w = default_start(a, left);
        y = apply_half(w);
    }

    double rq = y.squaredNorm();
    bool converged = false;
    std::size_t it = 0;
    while (it < opt.max_iters) {
        Vector z = apply_other(y);
        const double zn = z.norm();
        if (zn == 0.0)
            break;
        Vector w_next = z / zn;
        Vector y_next = apply_half(w_next);
        const double rq_next = y_next.squaredNorm();
        ++it;
        // The Rayleigh quotient of a PSD operator never drops along the power
        // sequence; a decrease is round-off, keep the better iterate.
        if (rq_next >= rq) {
            w = std::move(w_next);
            y = std::move(y_next);
        }
        const bool small = std::abs(rq_next - rq) <= opt.tol * std::max(rq_next, rq);
        rq = std::max(rq, rq_next);
        if (small) {
            converged = true;
            break;
        }
    }

    SingularTriple t = complete(a, w, left);
    t.converged = converged;
    t.iterations = it;
    return t;
}

} // namespace

SingularTriple top_singular_triple(const Matrix& a, const SvdOptions& options,
                                   const std::optional<Vector>& start)
{
    if (a.size() == 0)
        throw DimensionError("empty matrix");
    const double fro = a.norm();
    if (!(fro > 0.0))
        throw DegenerateInputError("top singular triple of a zero matrix is undefined");
    if (!std::isfinite(fro))
        throw DegenerateInputError("matrix has non-finite entries");

    const bool left = a.rows() <= a.cols();
    const auto small_dim = static_cast<std::size_t>(std::min(a.rows(), a.cols()));

    bool dense = options.kind == SvdOptions::Kind::dense;
    if (options.kind == SvdOptions::Kind::automatic)
        dense = small_dim <= options.dense_threshold;

    SingularTriple t;
    if (dense) {
        const Matrix gram = left ? Matrix(a * a.transpose()) : Matrix(a.transpose() * a);
        Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
        if (es.info() != Eigen::Success)
            throw InternalError("symmetric eigensolver failed");
        t = complete(a, es.eigenvectors().col(gram.rows() - 1), left);
        t.iterations = 1;
    } else {
        t = power_iteration(a, left, options, start);
    }
    fix_sign(t);
    return t;
}

SymmetricEigen symmetric_eig(const Matrix& s)
{
    if (s.rows() != s.cols())
        throw DimensionError("symmetric_eig needs a square matrix");
    if (s.size() == 0)
        return {Vector(0), Matrix(0, 0)};
    const double scale = s.cwiseAbs().maxCoeff();
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale)
        throw ContractViolation("matrix is not symmetric (max |S - S^T| = " + std::to_string(asym) +
                                ")");

    const Matrix sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success)
        throw InternalError("symmetric eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

Inertia inertia(const Matrix& s, double zero_tol)
{
    const auto eig = symmetric_eig(s);
    const double scale = s.size() ? std::max(1.0, s.cwiseAbs().maxCoeff()) : 1.0;
    const double thresh = zero_tol * scale;
    Inertia in;
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        const double lam = eig.values[k];
        if (std::abs(lam) <= thresh)
            ++in.zero;
        else if (lam > 0.0)
            ++in.positive;
        else
            ++in.negative;
    }
    return in;
}

} // namespace rankone
