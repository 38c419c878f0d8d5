#include "rankone/ami.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include "rankone/error.hpp"

namespace rankone {

namespace {

using Index = Eigen::Index;

Index ix(std::size_t n)
{
    return static_cast<Index>(n);
}

// LU factors of every diagonal block.
std::vector<Eigen::FullPivLU<Matrix>> factor_diagonal(const BlockQuadraticForm& q)
{
    std::vector<Eigen::FullPivLU<Matrix>> lus;
    lus.reserve(q.blocks());
    for (std::size_t j = 0; j < q.blocks(); ++j) {
        Eigen::FullPivLU<Matrix> lu(Matrix(q.block(j, j)));
        lu.setThreshold(1e-12);
        if (!lu.isInvertible())
            throw ContractViolation("diagonal block " + std::to_string(j + 1) + " is singular");
        lus.push_back(std::move(lu));
    }
    return lus;
}

} // namespace

BlockQuadraticForm::BlockQuadraticForm(Matrix h, std::vector<std::size_t> block_sizes)
    : h_(std::move(h)), sizes_(std::move(block_sizes))
{
    if (h_.rows() != h_.cols())
        throw DimensionError("H must be square");
    if (sizes_.empty())
        throw ContractViolation("at least one block is required");
    std::size_t total = 0;
    for (std::size_t s : sizes_) {
        if (s == 0)
            throw ContractViolation("block sizes must be positive");
        offsets_.push_back(total);
        total += s;
    }
    if (total != static_cast<std::size_t>(h_.rows()))
        throw DimensionError("block sizes sum to " + std::to_string(total) + ", H has order " +
                             std::to_string(h_.rows()));
    const double scale = h_.size() ? h_.cwiseAbs().maxCoeff() : 0.0;
    if (h_.size() && (h_ - h_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw ContractViolation("H is not symmetric");
}

bool BlockQuadraticForm::diagonal_blocks_definite() const
{
    for (std::size_t j = 0; j < blocks(); ++j) {
        const Matrix b = block(j, j);
        const Inertia in = inertia(b, 1e-8);
        if (in.positive != sizes_[j])
            return false;
    }
    return true;
}

Matrix gauss_seidel_matrix(const BlockQuadraticForm& q)
{
    const auto lus = factor_diagonal(q);
    const Index n = ix(q.size());
    Matrix k = Matrix::Zero(n, n);
    // Block row j of L_H K = -U_H:
    // H_jj K_j = -U_j - sum_{l<j} H_jl K_l
    for (std::size_t j = 0; j < q.blocks(); ++j) {
        const Index r0 = ix(q.offset(j)), rows = ix(q.block_sizes()[j]);
        Matrix rhs = Matrix::Zero(rows, n);
        const Index c0 = r0 + rows;
        rhs.rightCols(n - c0) = -q.h().block(r0, c0, rows, n - c0);
        for (std::size_t l = 0; l < j; ++l)
            rhs -= q.block(j, l) * k.middleRows(ix(q.offset(l)), ix(q.block_sizes()[l]));
        k.middleRows(r0, rows) = lus[j].solve(rhs);
    }
    return k;
}

Vector ami_sweep(const BlockQuadraticForm& q, const Vector& xi)
{
    if (static_cast<std::size_t>(xi.size()) != q.size())
        throw DimensionError("xi has length " + std::to_string(xi.size()) + ", H has order " +
                             std::to_string(q.size()));
    const auto lus = factor_diagonal(q);
    Vector next = xi;
    for (std::size_t j = 0; j < q.blocks(); ++j) {
        const Index r0 = ix(q.offset(j)), rows = ix(q.block_sizes()[j]);
        // Blocks before j already hold the new values, blocks after j the old.
        Vector rhs = -(q.h().middleRows(r0, rows) * next) + q.block(j, j) * next.segment(r0, rows);
        next.segment(r0, rows) = lus[j].solve(rhs);
    }
    return next;
}

AmiSpectrumReport analyze(const BlockQuadraticForm& q, const AmiTolerances& tol)
{
    AmiSpectrumReport r;
    const Matrix k = gauss_seidel_matrix(q);
    Eigen::EigenSolver<Matrix> es(k, true);
    if (es.info() != Eigen::Success)
        throw InternalError("eigenvalue computation for K did not converge");
    r.eigenvalues = es.eigenvalues();
    r.eigenvectors = es.eigenvectors();

    const double knorm = std::max(k.norm(), std::numeric_limits<double>::min());
    const Eigen::MatrixXcd kc = k.cast<std::complex<double>>();
    for (Index c = 0; c < r.eigenvalues.size(); ++c) {
        const Eigen::VectorXcd v = r.eigenvectors.col(c);
        const double res = (kc * v - r.eigenvalues[c] * v).norm() / std::max(v.norm(), 1e-300);
        r.max_eigen_residual = std::max(r.max_eigen_residual, res / knorm);
    }

    r.unit_circle_only_one = true;
    for (Index c = 0; c < r.eigenvalues.size(); ++c) {
        const double mod = std::abs(r.eigenvalues[c]);
        r.spectral_radius = std::max(r.spectral_radius, mod);
        if (std::abs(mod - 1.0) <= tol.unit_circle) {
            ++r.gamma;
            if (std::abs(r.eigenvalues[c] - 1.0) > tol.at_one)
                r.unit_circle_only_one = false;
        } else if (mod < 1.0) {
            ++r.alpha;
        } else {
            ++r.beta;
        }
    }

    r.h_inertia = inertia(q.h(), tol.zero);
    r.hypothesis = q.diagonal_blocks_definite();
    if (r.hypothesis)
        r.theorem_holds = r.alpha == r.h_inertia.positive && r.beta == r.h_inertia.negative &&
                          r.gamma == r.h_inertia.zero;
    const bool contracting = r.spectral_radius < 1.0 && r.gamma == 0;
    const bool definite = r.h_inertia.positive == q.size();
    r.ostrowski = contracting == definite;
    r.pi_bound = r.h_inertia.positive >=
                 *std::max_element(q.block_sizes().begin(), q.block_sizes().end());
    return r;
}

BasinTrajectory basin_experiment(const BlockQuadraticForm& q, const Vector& xi0, std::size_t sweeps)
{
    if (static_cast<std::size_t>(xi0.size()) != q.size())
        throw DimensionError("xi0 has length " + std::to_string(xi0.size()) + ", H has order " +
                             std::to_string(q.size()));
    BasinTrajectory b;
    const double n0 = xi0.norm();
    const double hmax = q.size() ? q.h().cwiseAbs().maxCoeff() : 0.0;
    const double target = 1e-10 * n0;

    Vector xi = xi0;
    b.norms.push_back(n0);
    b.f_values.push_back(q.value(xi));
    b.converged_to_zero = n0 <= target;
    for (std::size_t s = 0; s < sweeps && !b.converged_to_zero; ++s) {
        xi = ami_sweep(q, xi);
        const double n = xi.norm();
        const double f = q.value(xi);
        // Round-off in f grows with the current iterate, not only with xi_0.
        const double slack = 1e-10 * hmax * std::max(n0 * n0, n * n);
        if (f < b.f_values.back() - slack)
            b.f_nondecreasing = false;
        b.norms.push_back(n);
        b.f_values.push_back(f);
        if (!std::isfinite(n))
            break;
        b.converged_to_zero = n <= target;
    }
    return b;
}

BlockQuadraticForm local_quadratic_form(const Tensor& t, const UnitTuple& u, double h)
{
    if (u.dims() != t.dims())
        throw DimensionError("tuple does not match the tensor shape");
    if (!(h > 0.0))
        throw ContractViolation("finite-difference step must be positive");

    // Orthonormal tangent basis of each sphere at x_i.
    std::vector<Matrix> bases;
    std::vector<std::size_t> sizes;
    std::vector<std::size_t> modes;
    for (std::size_t i = 0; i < t.order(); ++i) {
        const Index m = u[i].size();
        if (m < 2)
            continue;
        const Matrix qfull = Eigen::HouseholderQR<Matrix>(Matrix(u[i])).householderQ();
        bases.push_back(qfull.rightCols(m - 1));
        sizes.push_back(static_cast<std::size_t>(m - 1));
        modes.push_back(i);
    }
    if (modes.empty())
        throw DegenerateInputError("every mode has dimension 1; there is no tangent space");

    std::size_t n = 0;
    std::vector<std::size_t> offs;
    for (std::size_t s : sizes) {
        offs.push_back(n);
        n += s;
    }

    auto g = [&](const Vector& xi) {
        VectorTuple v = u.vectors();
        for (std::size_t b = 0; b < modes.size(); ++b) {
            Vector w = u[modes[b]] + bases[b] * xi.segment(ix(offs[b]), ix(sizes[b]));
            v[modes[b]] = w / w.norm();
        }
        return f_value(t, v);
    };

    const Index nn = ix(n);
    Matrix hess(nn, nn);
    const double g0 = g(Vector::Zero(nn));
    for (Index a = 0; a < nn; ++a) {
        Vector e = Vector::Zero(nn);
        e[a] = h;
        hess(a, a) = (g(e) - 2.0 * g0 + g(-e)) / (h * h);
        for (Index c = a + 1; c < nn; ++c) {
            Vector f = Vector::Zero(nn);
            f[c] = h;
            const double v = (g(e + f) - g(e - f) - g(-e + f) + g(-e - f)) / (4.0 * h * h);
            hess(a, c) = v;
            hess(c, a) = v;
        }
    }
    // f(xi) ~ f(0) + xi^T (Hess / 2) xi, so H = -Hess / 2.
    return BlockQuadraticForm(-0.5 * hess, sizes);
}

BlockQuadraticForm read_quadratic_form(std::istream& in)
{
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&](const char* what) {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                return;
        }
        throw ParseError(line_no + 1, std::string("missing ") + what);
    };

    next_line("order line");
    std::size_t order = 0;
    {
        std::istringstream ls(line);
        long long v = 0;
        std::string extra;
        if (!(ls >> v) || v <= 0 || (ls >> extra))
            throw ParseError(line_no, "expected a positive order L");
        order = static_cast<std::size_t>(v);
    }

    next_line("block sizes line");
    std::vector<std::size_t> sizes;
    {
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            std::size_t pos = 0;
            long long v = 0;
            try {
                v = std::stoll(tok, &pos);
            } catch (const std::exception&) {
                throw ParseError(line_no, "block size '" + tok + "' is not an integer");
            }
            if (pos != tok.size() || v <= 0)
                throw ParseError(line_no, "block size '" + tok + "' is not a positive integer");
            sizes.push_back(static_cast<std::size_t>(v));
        }
        std::size_t total = 0;
        for (std::size_t s : sizes)
            total += s;
        if (total != order)
            throw ParseError(line_no, "block sizes sum to " + std::to_string(total) + ", expected " +
                                          std::to_string(order));
    }

    Matrix h(ix(order), ix(order));
    std::size_t count = 0;
    const std::size_t want = order * order;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            if (count == want)
                throw ParseError(line_no, "more than " + std::to_string(want) + " values");
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &pos);
            } catch (const std::exception&) {
                throw ParseError(line_no, "'" + tok + "' is not a number");
            }
            if (pos != tok.size() || !std::isfinite(v))
                throw ParseError(line_no, "'" + tok + "' is not a finite number");
            h(ix(count / order), ix(count % order)) = v;
            ++count;
        }
    }
    if (count != want)
        throw ParseError(line_no, "expected " + std::to_string(want) + " values, found " +
                                      std::to_string(count));
    return BlockQuadraticForm(std::move(h), std::move(sizes));
}

void write_quadratic_form(std::ostream& out, const BlockQuadraticForm& q)
{
    const auto old = out.precision(17);
    out << q.size() << '\n';
    for (std::size_t j = 0; j < q.blocks(); ++j)
        out << (j ? " " : "") << q.block_sizes()[j];
    out << '\n';
    for (Index r = 0; r < q.h().rows(); ++r) {
        for (Index c = 0; c < q.h().cols(); ++c)
            out << (c ? " " : "") << q.h()(r, c);
        out << '\n';
    }
    out.precision(old);
}

Vector read_vector(std::istream& in, std::size_t length)
{
    std::vector<double> values;
    std::string tok;
    while (in >> tok) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &pos);
        } catch (const std::exception&) {
            throw ParseError(0, "'" + tok + "' is not a number");
        }
        if (pos != tok.size() || !std::isfinite(v))
            throw ParseError(0, "'" + tok + "' is not a finite number");
        values.push_back(v);
    }
    if (values.size() != length)
        throw DimensionError("expected a vector of length " + std::to_string(length) + ", found " +
                             std::to_string(values.size()) + " values");
    return Eigen::Map<const Vector>(values.data(), ix(values.size()));
}

void write_report(std::ostream& out, const AmiSpectrumReport& r)
{
    const auto old = out.precision(17);
    for (Index c = 0; c < r.eigenvalues.size(); ++c)
        out << "ami.eigenvalue." << c + 1 << " = " << r.eigenvalues[c].real() << ' '
            << r.eigenvalues[c].imag() << '\n';
    out << "ami.spectral_radius = " << r.spectral_radius << '\n';
    out << "ami.max_eigen_residual = " << r.max_eigen_residual << '\n';
    out << "ami.alpha = " << r.alpha << '\n';
    out << "ami.beta = " << r.beta << '\n';
    out << "ami.gamma = " << r.gamma << '\n';
    out << "ami.pi = " << r.h_inertia.positive << '\n';
    out << "ami.nu = " << r.h_inertia.negative << '\n';
    out << "ami.zeta = " << r.h_inertia.zero << '\n';
    out << "ami.hypothesis = " << (r.hypothesis ? "true" : "false") << '\n';
    out << "ami.theorem_holds = "
        << (r.theorem_holds ? (*r.theorem_holds ? "true" : "false") : "not_applicable") << '\n';
    out << "ami.ostrowski = " << (r.ostrowski ? "true" : "false") << '\n';
    out << "ami.pi_bound = " << (r.pi_bound ? "true" : "false") << '\n';
    out << "ami.unit_circle_only_one = " << (r.unit_circle_only_one ? "true" : "false") << '\n';
    out.precision(old);
}

} // namespace rankone
