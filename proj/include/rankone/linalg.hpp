#pragma once

#include <cstddef>
#include <optional>

#include "rankone/tensor.hpp"

namespace rankone {

// Largest singular value with its left/right singular vectors:
// A v = sigma u and u^T A = sigma v^T.
struct SingularTriple {
    double sigma = 0.0;
    Vector u;
    Vector v;
    bool converged = true;
    std::size_t iterations = 0;
};

struct SvdOptions {
    enum class Kind { automatic, dense, iterative };

    Kind kind = Kind::automatic;
    std::size_t max_iters = 1000;
    // Relative change of the Rayleigh quotient that ends the power iteration.
    double tol = 1e-12;
    // automatic picks dense when min(m, l) <= this.
    std::size_t dense_threshold = 64;

    static SvdOptions dense() { return {Kind::dense}; }
    static SvdOptions iterative(std::size_t max_iters, double tol)
    {
        return {Kind::iterative, max_iters, tol};
    }
};

// Leading singular triple via the smaller Gram matrix (A A^T or A^T A).
// Dense mode forms the Gram matrix and takes its top eigenpair; iterative mode
// runs power iteration on the Gram operator without forming it, starting from
// `start` when given (a vector on the Gram side, i.e. length min(m, l) side).
// The sign of u is fixed so that its first entry above 1e-12 in magnitude is
// positive. Throws DegenerateInputError for a zero matrix.
SingularTriple top_singular_triple(const Matrix& a, const SvdOptions& options = {},
                                   const std::optional<Vector>& start = std::nullopt);

struct SymmetricEigen {
    Vector values;  // ascending
    Matrix vectors; // orthonormal columns
};

// Throws ContractViolation when ||S - S^T||_max > 1e-10 ||S||_max.
SymmetricEigen symmetric_eig(const Matrix& s);

struct Inertia {
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::size_t zero = 0;

    bool operator==(const Inertia&) const = default;
};

// Eigenvalue sign counts; |lambda| <= zero_tol * max(1, ||S||_max) counts as zero.
Inertia inertia(const Matrix& s, double zero_tol);

} // namespace rankone
