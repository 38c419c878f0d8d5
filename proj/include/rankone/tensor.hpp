#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rankone {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Shape = std::vector<std::size_t>;

// A tuple of d vectors in R^{m_1} x ... x R^{m_d}, with no norm constraint.
using VectorTuple = std::vector<Vector>;

// Dense real d-mode tensor. Entries are stored row-major: the last index
// runs fastest. Modes are numbered from 0 throughout the library.
class Tensor {
public:
    explicit Tensor(Shape dims);
    Tensor(Shape dims, std::vector<double> data);

    std::size_t order() const noexcept { return dims_.size(); }
    const Shape& dims() const noexcept { return dims_; }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    // Linear offset of a multi-index; bounds are checked.
    std::size_t offset(std::span<const std::size_t> index) const;

    double operator()(std::span<const std::size_t> index) const { return data_[offset(index)]; }
    double& operator()(std::span<const std::size_t> index) { return data_[offset(index)]; }
    double at(std::initializer_list<std::size_t> index) const;
    double& at(std::initializer_list<std::size_t> index);

    // Hilbert-Schmidt (Frobenius) norm.
    double norm() const;

    Tensor& operator+=(const Tensor& other);
    Tensor& operator*=(double s);

    friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
    friend Tensor operator*(double s, Tensor a) { return a *= s; }

    bool operator==(const Tensor&) const = default;

private:
    Shape dims_;
    std::vector<double> data_;
};

// A point (x_1, ..., x_d) on the product of unit spheres.
class UnitTuple {
public:
    UnitTuple() = default;

    // Normalizes every vector. Throws DegenerateInputError on a zero vector.
    explicit UnitTuple(VectorTuple vectors);

    std::size_t order() const noexcept { return vectors_.size(); }
    const Vector& operator[](std::size_t mode) const { return vectors_.at(mode); }
    const VectorTuple& vectors() const noexcept { return vectors_; }
    Shape dims() const;

    // Replaces one vector, normalizing it.
    void set(std::size_t mode, const Vector& v);
    // Replaces one vector that the caller guarantees is already unit length.
    void set_unit(std::size_t mode, Vector v);

    UnitTuple negated(std::size_t mode) const;

private:
    VectorTuple vectors_;
};

// lambda * x_1 (x) ... (x) x_d
struct Rank1Tensor {
    double scale = 0.0;
    UnitTuple axes;

    Tensor to_tensor() const;
};

// x_1 (x) ... (x) x_d for arbitrary (not necessarily unit) vectors.
Tensor outer(std::span<const Vector> vectors);

double inner(const Tensor& a, const Tensor& b);
double hilbert_schmidt_norm(const Tensor& t);

// Contracts `t` against `x` over the strictly increasing mode set `modes`;
// the dims of `x` must equal the dims of `t` at those modes. The result lives
// on the complementary modes in their original order. A full contraction
// yields a one-entry tensor of shape {1} holding inner(t, x).
Tensor contract(const Tensor& t, std::span<const std::size_t> modes, const Tensor& x);

// Mode-k vector product: contracts a single mode against v.
Tensor contract_mode(const Tensor& t, std::size_t mode, const Vector& v);

// T x (outer product of all vectors except the one at `skip`), as a vector
// of length m_skip.
Vector contract_all_but(const Tensor& t, std::span<const Vector> vectors, std::size_t skip);

// T x (outer product of all vectors except modes i < j), as an m_i x m_j matrix.
Matrix contract_all_but_pair(const Tensor& t, std::span<const Vector> vectors,
                             std::size_t i, std::size_t j);

// Mode-i unfolding, m_i x (prod_{j != i} m_j). Column index linearizes the
// remaining modes in increasing order, last fastest, so that
// contract_all_but(t, x, i) == unfold(t, i) * vec(outer(x without i)).
Matrix unfold(const Tensor& t, std::size_t mode);

// f(x_1, ..., x_d) = <T, x_1 (x) ... (x) x_d>
double f_value(const Tensor& t, const UnitTuple& u);
double f_value(const Tensor& t, std::span<const Vector> vectors);

// min_a ||T - a x_1 (x) ... (x) x_d|| = sqrt(||T||^2 - f^2).
double residual_norm(const Tensor& t, const UnitTuple& u);

// Text interchange format: line 1 = d, line 2 = dims, then the entries in
// storage order, whitespace separated.
Tensor read_tensor_text(std::istream& in);
Tensor read_tensor_file(const std::string& path);
void write_tensor_text(std::ostream& out, const Tensor& t);

} // namespace rankone
