// channel.hpp: the coarse-graining channel that keeps the first factor of
// every sector (tracing out the second), its lift back to the full space, and
// the maximum-entropy state for a set of algebra expectations.

#pragma once

#include "ethq/algebra.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ethq {

// Weights below this are treated as absent: the block has no state.
inline constexpr double kEmptySectorWeight = 1e-14;

struct SectorBlock {
    double weight = 0.0;
    std::optional<DensityMatrix> state;  // d1 x d1, absent when weight < kEmptySectorWeight

    bool empty() const noexcept { return !state.has_value(); }
};

// Image of a state under the channel: one reduced block per sector plus the
// untouched null block. The weights sum to one.
struct CoarseState {
    std::vector<SectorBlock> sectors;
    double null_weight = 0.0;
    std::optional<DensityMatrix> null_state;  // on H_0, present when null_weight >= kEmptySectorWeight

    double total_weight() const;
    std::vector<double> weights() const;  // sector weights then the null weight
};

CoarseState apply_cir(const DensityMatrix& rho, const GeneralizedBipartition& bp);

// ⊕ p_a (ρ_{1,a} ⊗ I/d2_a) ⊕ p_0 ρ_0.
DensityMatrix lift(const CoarseState& cs, const GeneralizedBipartition& bp);

// Largest deviation of a CoarseState pair, block by block.
double coarse_state_distance(const CoarseState& a, const CoarseState& b);

// r_k = tr[B_k ρ] for the algebra's Hermitian basis.
RealVector algebra_expectations(const DensityMatrix& rho, const OperatorAlgebra& a);

struct MaxEntropyResult {
    RealVector lagrange_multipliers;  // ρ = exp(Ω - Σ λ_k B_k)
    double log_partition = 0.0;       // Ω = -log tr exp(-Σ λ_k B_k)
    DensityMatrix mes;
    int iterations = 0;
    double residual = 0.0;  // max_k |tr[B_k ρ] - r_k|
};

struct MaxEntropyOptions {
    double tolerance = 1e-10;
    int max_iterations = 500;
};

// Minimizes the convex dual F(λ) = log Z(λ) + λ·r by damped Newton steps on
// the Kubo–Mori Hessian. Throws NumericalToleranceError (with the iteration
// count and residual in the message) when it fails to converge.
MaxEntropyResult max_entropy_state(const RealVector& expectations, const OperatorAlgebra& a,
                                   const MaxEntropyOptions& options = {});

struct JaynesReport {
    double deviation = 0.0;  // max |lift(cir(ρ)) - ρ_MES| on the algebra support, plus the H_0 weight gap
    bool converged = false;
    int iterations = 0;
    std::string message;

    bool ok(double tol = 1e-7) const { return converged && deviation <= tol; }
};

// Compares the channel route with the maximum-entropy route. Never throws on
// solver failure; the failure is reported instead.
JaynesReport verify_jaynes(const DensityMatrix& rho, const GeneralizedBipartition& bp, const OperatorAlgebra& a);

}  // namespace ethq
