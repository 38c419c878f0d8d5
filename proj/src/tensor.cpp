#include "rankone/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>

#include "rankone/error.hpp"

namespace rankone {

namespace {

std::size_t product(const Shape& dims)
{
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

void validate_dims(const Shape& dims)
{
    if (dims.empty())
        throw DimensionError("tensor must have at least one mode");
    for (std::size_t k = 0; k < dims.size(); ++k)
        if (dims[k] == 0)
            throw DimensionError("dimension of mode " + std::to_string(k) + " is zero");
}

std::string shape_string(const Shape& dims)
{
    std::string s;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (k)
            s += 'x';
        s += std::to_string(dims[k]);
    }
    return s;
}

void require_same_shape(const Tensor& a, const Tensor& b)
{
    if (a.dims() != b.dims())
        throw DimensionError("shape mismatch: " + shape_string(a.dims()) + " vs " +
                             shape_string(b.dims()));
}

void require_vectors_fit(const Tensor& t, std::span<const Vector> vectors)
{
    if (vectors.size() != t.order())
        throw DimensionError("expected " + std::to_string(t.order()) + " vectors, got " +
                             std::to_string(vectors.size()));
    for (std::size_t k = 0; k < vectors.size(); ++k)
        if (static_cast<std::size_t>(vectors[k].size()) != t.dim(k))
            throw DimensionError("vector " + std::to_string(k) + " has length " +
                                 std::to_string(vectors[k].size()) + ", mode has dimension " +
                                 std::to_string(t.dim(k)));
}

} // namespace

Tensor::Tensor(Shape dims) : dims_(std::move(dims))
{
    validate_dims(dims_);
    data_.assign(product(dims_), 0.0);
}

Tensor::Tensor(Shape dims, std::vector<double> data) : dims_(std::move(dims)), data_(std::move(data))
{
    validate_dims(dims_);
    if (data_.size() != product(dims_))
        throw DimensionError("tensor of shape " + shape_string(dims_) + " needs " +
                             std::to_string(product(dims_)) + " entries, got " +
                             std::to_string(data_.size()));
}

std::size_t Tensor::offset(std::span<const std::size_t> index) const
{
    if (index.size() != dims_.size())
        throw DimensionError("index has " + std::to_string(index.size()) + " components, tensor has " +
                             std::to_string(dims_.size()) + " modes");
    std::size_t off = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (index[k] >= dims_[k])
            throw DimensionError("index " + std::to_string(index[k]) + " out of range for mode " +
                                 std::to_string(k));
        off = off * dims_[k] + index[k];
    }
    return off;
}

double Tensor::at(std::initializer_list<std::size_t> index) const
{
    return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double& Tensor::at(std::initializer_list<std::size_t> index)
{
    return data_[offset(std::span<const std::size_t>(index.begin(), index.size()))];
}

double Tensor::norm() const
{
    return std::sqrt(inner(*this, *this));
}

Tensor& Tensor::operator+=(const Tensor& other)
{
    require_same_shape(*this, other);
    for (std::size_t k = 0; k < data_.size(); ++k)
        data_[k] += other.data_[k];
    return *this;
}

Tensor& Tensor::operator*=(double s)
{
    for (double& v : data_)
        v *= s;
    return *this;
}

UnitTuple::UnitTuple(VectorTuple vectors)
{
    vectors_.reserve(vectors.size());
    for (auto& v : vectors) {
        const double n = v.norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw DegenerateInputError("cannot normalize a zero or non-finite vector");
        vectors_.push_back(v / n);
    }
}

Shape UnitTuple::dims() const
{
    Shape dims;
    for (const auto& v : vectors_)
        dims.push_back(static_cast<std::size_t>(v.size()));
    return dims;
}

void UnitTuple::set(std::size_t mode, const Vector& v)
{
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw DegenerateInputError("cannot normalize a zero or non-finite vector");
    vectors_.at(mode) = v / n;
}

void UnitTuple::set_unit(std::size_t mode, Vector v)
{
    vectors_.at(mode) = std::move(v);
}

UnitTuple UnitTuple::negated(std::size_t mode) const
{
    UnitTuple copy = *this;
    copy.vectors_.at(mode) = -copy.vectors_.at(mode);
    return copy;
}

Tensor Rank1Tensor::to_tensor() const
{
    Tensor t = outer(axes.vectors());
    t *= scale;
    return t;
}

Tensor outer(std::span<const Vector> vectors)
{
    Shape dims;
    for (const auto& v : vectors)
        dims.push_back(static_cast<std::size_t>(v.size()));
    validate_dims(dims);

    // Kronecker expansion, earliest mode outermost.
    std::vector<double> data{1.0};
    for (const auto& v : vectors) {
        std::vector<double> next;
        next.reserve(data.size() * static_cast<std::size_t>(v.size()));
        for (double a : data)
            for (Eigen::Index i = 0; i < v.size(); ++i)
                next.push_back(a * v[i]);
        data = std::move(next);
    }
    return Tensor(std::move(dims), std::move(data));
}

double inner(const Tensor& a, const Tensor& b)
{
    require_same_shape(a, b);
    const auto x = a.data();
    const auto y = b.data();
    return std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
}

double hilbert_schmidt_norm(const Tensor& t)
{
    return t.norm();
}

Tensor contract(const Tensor& t, std::span<const std::size_t> modes, const Tensor& x)
{
    const std::size_t d = t.order();
    if (modes.empty())
        throw DimensionError("contraction needs at least one mode");
    if (modes.size() > d)
        throw DimensionError("more contraction modes than tensor modes");
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (modes[k] >= d)
            throw DimensionError("contraction mode " + std::to_string(modes[k]) + " out of range");
        if (k > 0 && modes[k] <= modes[k - 1])
            throw DimensionError("contraction modes must be strictly increasing");
    }
    if (x.order() != modes.size())
        throw DimensionError("contraction operand has " + std::to_string(x.order()) +
                             " modes, expected " + std::to_string(modes.size()));

    std::vector<bool> contracted(d, false);
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (x.dim(k) != t.dim(modes[k]))
            throw DimensionError("operand dimension " + std::to_string(x.dim(k)) +
                                 " does not match mode " + std::to_string(modes[k]));
        contracted[modes[k]] = true;
    }

    Shape out_dims;
    for (std::size_t k = 0; k < d; ++k)
        if (!contracted[k])
            out_dims.push_back(t.dim(k));
    if (out_dims.empty())
        return Tensor({1}, {inner(t, x)});

    // Row-major strides of x and of the result, indexed by tensor mode.
    std::vector<std::size_t> x_stride(d, 0), out_stride(d, 0);
    {
        std::size_t sx = 1, so = 1;
        for (std::size_t k = d; k-- > 0;) {
            if (contracted[k]) {
                x_stride[k] = sx;
                sx *= t.dim(k);
            } else {
                out_stride[k] = so;
                so *= t.dim(k);
            }
        }
    }

    Tensor out(out_dims);
    auto out_data = out.data();
    const auto t_data = t.data();
    const auto x_data = x.data();
    std::vector<std::size_t> index(d, 0);
    std::size_t xo = 0, oo = 0;
    for (std::size_t lin = 0; lin < t.size(); ++lin) {
        out_data[oo] += t_data[lin] * x_data[xo];
        // odometer increment, last mode fastest
        for (std::size_t k = d; k-- > 0;) {
            ++index[k];
            xo += x_stride[k];
            oo += out_stride[k];
            if (index[k] < t.dim(k))
                break;
            xo -= x_stride[k] * index[k];
            oo -= out_stride[k] * index[k];
            index[k] = 0;
        }
    }
    return out;
}

Tensor contract_mode(const Tensor& t, std::size_t mode, const Vector& v)
{
    if (mode >= t.order())
        throw DimensionError("mode " + std::to_string(mode) + " out of range");
    const std::size_t m = t.dim(mode);
    if (static_cast<std::size_t>(v.size()) != m)
        throw DimensionError("vector length " + std::to_string(v.size()) +
                             " does not match mode dimension " + std::to_string(m));

    std::size_t outer_size = 1, inner_size = 1;
    for (std::size_t k = 0; k < mode; ++k)
        outer_size *= t.dim(k);
    for (std::size_t k = mode + 1; k < t.order(); ++k)
        inner_size *= t.dim(k);

    Shape out_dims;
    for (std::size_t k = 0; k < t.order(); ++k)
        if (k != mode)
            out_dims.push_back(t.dim(k));
    if (out_dims.empty())
        out_dims.push_back(1);

    Tensor out(out_dims);
    auto dst = out.data();
    const auto src = t.data();
    for (std::size_t o = 0; o < outer_size; ++o) {
        double* row = dst.data() + o * inner_size;
        const double* block = src.data() + o * m * inner_size;
        if (inner_size == 1) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                acc += block[i] * v[static_cast<Eigen::Index>(i)];
            row[0] = acc;
            continue;
        }
        for (std::size_t i = 0; i < m; ++i) {
            const double w = v[static_cast<Eigen::Index>(i)];
            const double* src_row = block + i * inner_size;
            for (std::size_t k = 0; k < inner_size; ++k)
                row[k] += w * src_row[k];
        }
    }
    return out;
}

Vector contract_all_but(const Tensor& t, std::span<const Vector> vectors, std::size_t skip)
{
    require_vectors_fit(t, vectors);
    if (skip >= t.order())
        throw DimensionError("mode " + std::to_string(skip) + " out of range");

    std::optional<Tensor> r;
    const Tensor* cur = &t;
    for (std::size_t k = t.order(); k-- > 0;)
        if (k != skip) {
            r = contract_mode(*cur, k, vectors[k]);
            cur = &*r;
        }
    const auto d = cur->data();
    return Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

Matrix contract_all_but_pair(const Tensor& t, std::span<const Vector> vectors, std::size_t i,
                             std::size_t j)
{
    require_vectors_fit(t, vectors);
    if (!(i < j && j < t.order()))
        throw DimensionError("pair modes must satisfy i < j < d");

    std::optional<Tensor> r;
    const Tensor* cur = &t;
    for (std::size_t k = t.order(); k-- > 0;)
        if (k != i && k != j) {
            r = contract_mode(*cur, k, vectors[k]);
            cur = &*r;
        }
    const auto rows = static_cast<Eigen::Index>(t.dim(i));
    const auto cols = static_cast<Eigen::Index>(t.dim(j));
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        cur->data().data(), rows, cols);
}

Matrix unfold(const Tensor& t, std::size_t mode)
{
    if (mode >= t.order())
        throw DimensionError("mode " + std::to_string(mode) + " out of range");
    const std::size_t m = t.dim(mode);
    std::size_t outer_size = 1, inner_size = 1;
    for (std::size_t k = 0; k < mode; ++k)
        outer_size *= t.dim(k);
    for (std::size_t k = mode + 1; k < t.order(); ++k)
        inner_size *= t.dim(k);

    Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(outer_size * inner_size));
    const auto src = t.data();
    for (std::size_t o = 0; o < outer_size; ++o)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < inner_size; ++k)
                a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(o * inner_size + k)) =
                    src[(o * m + i) * inner_size + k];
    return a;
}

double f_value(const Tensor& t, std::span<const Vector> vectors)
{
    require_vectors_fit(t, vectors);
    const std::size_t last = t.order() - 1;
    return contract_all_but(t, vectors, last).dot(vectors[last]);
}

double f_value(const Tensor& t, const UnitTuple& u)
{
    return f_value(t, u.vectors());
}

double residual_norm(const Tensor& t, const UnitTuple& u)
{
    const double f = f_value(t, u);
    const double norm2 = inner(t, t);
    const double radicand = norm2 - f * f;
    if (radicand < -1e-10 * norm2)
        throw InternalError("f exceeds the tensor norm; tuple is not on the unit spheres");

    // Evaluate ||T - f x_1 (x) ... (x) x_d|| directly; the radicand above loses
    // half the digits when T is nearly rank one.
    Tensor diff = outer(u.vectors());
    diff *= -f;
    diff += t;
    return diff.norm();
}

} // namespace rankone
