#include "rankone/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "rankone/error.hpp"
#include "rankone/linalg.hpp"
#include "rankone/solvers.hpp"

namespace rankone {

namespace {

void require_fits(const Tensor& t, const UnitTuple& u)
{
    if (u.dims() != t.dims())
        throw DimensionError("tuple does not match the tensor shape");
}

void require_fits(const Tensor& t, const VectorTuple& v)
{
    if (v.size() != t.order())
        throw DimensionError("vector tuple has " + std::to_string(v.size()) + " entries, tensor has " +
                             std::to_string(t.order()) + " modes");
    for (std::size_t k = 0; k < v.size(); ++k)
        if (static_cast<std::size_t>(v[k].size()) != t.dim(k))
            throw DimensionError("vector " + std::to_string(k) + " does not match mode dimension");
}

const char* level_name(SemiMaxLevel l)
{
    return l == SemiMaxLevel::one_semi ? "one_semi" : "two_semi";
}

} // namespace

CriticalityReport criticality(const Tensor& t, const UnitTuple& u)
{
    require_fits(t, u);
    CriticalityReport r;
    r.f = f_value(t, u);
    for (std::size_t i = 0; i < t.order(); ++i) {
        const Vector c = contract_all_but(t, u.vectors(), i);
        r.lambda_per_mode.push_back(u[i].dot(c));
        r.residual_per_mode.push_back((c - r.f * u[i]).norm());
    }
    r.max_residual = *std::max_element(r.residual_per_mode.begin(), r.residual_per_mode.end());
    const auto [lo, hi] = std::minmax_element(r.lambda_per_mode.begin(), r.lambda_per_mode.end());
    r.lambda_spread = *hi - *lo;
    return r;
}

bool SemiMaxReport::all_passed() const
{
    return std::all_of(passed.begin(), passed.end(), [](bool b) { return b; });
}

SemiMaxReport check_semi_max(const Tensor& t, const UnitTuple& u, SemiMaxLevel level, double tol)
{
    require_fits(t, u);
    if (level == SemiMaxLevel::two_semi && t.order() != 3)
        throw UnsupportedConfiguration("two_semi check is available for d = 3 only, got d = " +
                                       std::to_string(t.order()));

    SemiMaxReport r;
    r.level = level;
    r.f = f_value(t, u);
    r.tolerance = tol * t.norm();

    if (level == SemiMaxLevel::one_semi) {
        // max over unit x_i of <x_i, c_i> is ||c_i||
        for (std::size_t i = 0; i < t.order(); ++i) {
            const double best = contract_all_but(t, u.vectors(), i).norm();
            r.margins.push_back(r.f - best);
        }
    } else {
        const ModePair pairs[3] = {{1, 2}, {0, 2}, {0, 1}};
        for (const auto& [p, q] : pairs) {
            const Matrix a = contract_all_but_pair(t, u.vectors(), p, q);
            const double best =
                a.norm() > 0.0 ? top_singular_triple(a, SvdOptions::dense()).sigma : 0.0;
            r.margins.push_back(r.f - best);
        }
    }
    for (double m : r.margins)
        r.passed.push_back(m >= -r.tolerance);
    return r;
}

VectorTuple fixed_point_from_tuple(const UnitTuple& u, double lambda)
{
    const std::size_t d = u.order();
    if (d <= 2)
        throw ContractViolation("fixed-point correspondence needs d >= 3");
    if (!(lambda > 0.0))
        throw ContractViolation("fixed-point correspondence needs lambda > 0");
    const double scale = std::pow(lambda, -1.0 / static_cast<double>(d - 2));
    VectorTuple v;
    for (const auto& x : u.vectors())
        v.push_back(scale * x);
    return v;
}

TupleFromFixedPoint tuple_from_fixed_point(const VectorTuple& v)
{
    const std::size_t d = v.size();
    if (d <= 2)
        throw ContractViolation("fixed-point correspondence needs d >= 3");
    const double n1 = v.front().norm();
    if (!(n1 > 0.0))
        throw DegenerateInputError("fixed point is zero");
    VectorTuple x;
    for (const auto& vi : v)
        x.push_back(vi / n1);
    return {UnitTuple(std::move(x)), std::pow(n1, -static_cast<double>(d - 2))};
}

VectorTuple apply_F(const Tensor& t, const VectorTuple& v)
{
    require_fits(t, v);
    if (t.order() < 3)
        throw ContractViolation("F is considered for d >= 3");
    VectorTuple out;
    for (std::size_t i = 0; i < t.order(); ++i)
        out.push_back(contract_all_but(t, v, i));
    return out;
}

std::size_t closest_fixed_point(const std::vector<VectorTuple>& candidates)
{
    if (candidates.empty())
        throw ContractViolation("no candidate fixed points");
    auto sq = [](const VectorTuple& v) {
        double s = 0.0;
        for (const auto& x : v)
            s += x.squaredNorm();
        return s;
    };
    std::size_t best = 0;
    double best_sq = sq(candidates[0]);
    for (std::size_t k = 1; k < candidates.size(); ++k) {
        const double s = sq(candidates[k]);
        if (s < best_sq) {
            best = k;
            best_sq = s;
        }
    }
    return best;
}

double jacobian_check_origin(const Tensor& t, double h)
{
    if (!(h > 0.0))
        throw ContractViolation("finite-difference step must be positive");
    if (t.order() < 3)
        throw ContractViolation("F is considered for d >= 3");

    std::vector<std::size_t> offsets{0};
    for (std::size_t k = 0; k < t.order(); ++k)
        offsets.push_back(offsets.back() + t.dim(k));
    const std::size_t n = offsets.back();

    auto zero_tuple = [&] {
        VectorTuple v;
        for (std::size_t k = 0; k < t.order(); ++k)
            v.push_back(Vector::Zero(static_cast<Eigen::Index>(t.dim(k))));
        return v;
    };
    // G(w) = w - F(w), flattened
    auto g = [&](const VectorTuple& w) {
        const VectorTuple fw = apply_F(t, w);
        Vector out(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < t.order(); ++k)
            out.segment(static_cast<Eigen::Index>(offsets[k]), static_cast<Eigen::Index>(t.dim(k))) =
                w[k] - fw[k];
        return out;
    };

    double worst = 0.0;
    for (std::size_t mode = 0; mode < t.order(); ++mode) {
        for (std::size_t i = 0; i < t.dim(mode); ++i) {
            VectorTuple plus = zero_tuple(), minus = zero_tuple();
            plus[mode][static_cast<Eigen::Index>(i)] = h;
            minus[mode][static_cast<Eigen::Index>(i)] = -h;
            const Vector column = (g(plus) - g(minus)) / (2.0 * h);
            const auto col = static_cast<Eigen::Index>(offsets[mode] + i);
            for (Eigen::Index r = 0; r < column.size(); ++r) {
                const double expected = r == col ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(column[r] - expected));
            }
        }
    }
    return worst;
}

void write_report(std::ostream& out, const CriticalityReport& r)
{
    const auto old = out.precision(17);
    out << "criticality.f = " << r.f << '\n';
    for (std::size_t i = 0; i < r.lambda_per_mode.size(); ++i) {
        out << "criticality.lambda." << i + 1 << " = " << r.lambda_per_mode[i] << '\n';
        out << "criticality.residual." << i + 1 << " = " << r.residual_per_mode[i] << '\n';
    }
    out << "criticality.max_residual = " << r.max_residual << '\n';
    out << "criticality.lambda_spread = " << r.lambda_spread << '\n';
    out.precision(old);
}

void write_report(std::ostream& out, const SemiMaxReport& r)
{
    const auto old = out.precision(17);
    out << "semimax.level = " << level_name(r.level) << '\n';
    out << "semimax.f = " << r.f << '\n';
    out << "semimax.tolerance = " << r.tolerance << '\n';
    const char* what = r.level == SemiMaxLevel::one_semi ? "mode" : "fixed_mode";
    for (std::size_t i = 0; i < r.margins.size(); ++i) {
        out << "semimax." << what << '.' << i + 1 << ".margin = " << r.margins[i] << '\n';
        out << "semimax." << what << '.' << i + 1 << ".pass = " << (r.passed[i] ? "true" : "false")
            << '\n';
    }
    out << "semimax.pass = " << (r.all_passed() ? "true" : "false") << '\n';
    out.precision(old);
}

} // namespace rankone
