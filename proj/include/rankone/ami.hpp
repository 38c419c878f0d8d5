#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "rankone/linalg.hpp"
#include "rankone/tensor.hpp"

namespace rankone {

// f(xi) = -xi^T H xi with H symmetric and partitioned into d diagonal blocks
// of sizes m_1..m_d. Block indices are 0-based in the API.
class BlockQuadraticForm {
public:
    // Throws ContractViolation if H is not symmetric within 1e-12 ||H||_max or
    // the block sizes do not partition H.
    BlockQuadraticForm(Matrix h, std::vector<std::size_t> block_sizes);

    const Matrix& h() const noexcept { return h_; }
    const std::vector<std::size_t>& block_sizes() const noexcept { return sizes_; }
    std::size_t blocks() const noexcept { return sizes_.size(); }
    std::size_t size() const noexcept { return static_cast<std::size_t>(h_.rows()); }
    std::size_t offset(std::size_t block) const { return offsets_.at(block); }

    auto block(std::size_t p, std::size_t q) const
    {
        return h_.block(static_cast<Eigen::Index>(offsets_[p]), static_cast<Eigen::Index>(offsets_[q]),
                        static_cast<Eigen::Index>(sizes_[p]), static_cast<Eigen::Index>(sizes_[q]));
    }

    // Every diagonal block positive definite: the origin is a semi-maximal point.
    bool diagonal_blocks_definite() const;

    double value(const Vector& xi) const { return -xi.dot(h_ * xi); }

private:
    Matrix h_;
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;
};

// K = -L_H^{-1} U_H, with L_H the block lower triangle (diagonal blocks
// included) and U_H the strict block upper triangle. Throws ContractViolation
// naming the first singular diagonal block.
Matrix gauss_seidel_matrix(const BlockQuadraticForm& q);

// One alternating-maximization sweep: block j solves
// H_jj xi_j' = -(sum_{l<j} H_jl xi_l' + sum_{l>j} H_jl xi_l).
Vector ami_sweep(const BlockQuadraticForm& q, const Vector& xi);

struct AmiSpectrumReport {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
    double spectral_radius = 0.0;
    // max ||K v - lambda v|| / max(||K||_F, tiny) over computed eigenpairs
    double max_eigen_residual = 0.0;

    std::size_t alpha = 0; // |lambda| < 1
    std::size_t beta = 0;  // |lambda| > 1
    std::size_t gamma = 0; // |lambda| = 1 within the unit-circle tolerance
    Inertia h_inertia;

    bool hypothesis = false;            // diagonal blocks positive definite
    std::optional<bool> theorem_holds;  // alpha=pi, beta=nu, gamma=zeta; unset without hypothesis
    bool ostrowski = false;             // (rho(K) < 1) == (H positive definite)
    bool pi_bound = false;              // pi >= max block size
    bool unit_circle_only_one = false;  // every |lambda|~1 eigenvalue is within 1e-6 of 1
};

struct AmiTolerances {
    double zero = 1e-8;        // inertia of H
    double unit_circle = 1e-8; // | |lambda| - 1 | classification
    double at_one = 1e-6;      // |lambda - 1| for unit-modulus eigenvalues
};

AmiSpectrumReport analyze(const BlockQuadraticForm& q, const AmiTolerances& tol = {});

struct BasinTrajectory {
    std::vector<double> norms;    // ||xi_k||, k = 0..
    std::vector<double> f_values; // -xi_k^T H xi_k
    bool converged_to_zero = false;
    bool f_nondecreasing = true;
};

// Iterates ami_sweep up to `sweeps` times; stops early once
// ||xi_k|| <= 1e-10 ||xi_0||.
BasinTrajectory basin_experiment(const BlockQuadraticForm& q, const Vector& xi0, std::size_t sweeps);

// Experimental: quadratic model of f restricted to S(m) around a critical
// tuple, in tangent coordinates of each sphere, by central differences with
// step h. Modes of dimension 1 carry no tangent directions and are dropped.
BlockQuadraticForm local_quadratic_form(const Tensor& t, const UnitTuple& u, double h = 1e-4);

// Text format: line 1 = L, line 2 = block sizes, then L*L values row by row.
BlockQuadraticForm read_quadratic_form(std::istream& in);
void write_quadratic_form(std::ostream& out, const BlockQuadraticForm& q);
// Whitespace-separated vector of a known length.
Vector read_vector(std::istream& in, std::size_t length);

void write_report(std::ostream& out, const AmiSpectrumReport& r);

} // namespace rankone
