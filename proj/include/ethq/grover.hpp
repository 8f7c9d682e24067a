// grover.hpp: amplitude amplification: the closed-form rotation picture, a
// full state-vector simulation, state distinguishing by repeated reflections,
// and the query-deviation quantity behind the square-root search bound.

#pragma once

#include "ethq/qcore.hpp"

#include <cstdint>
#include <vector>

namespace ethq {

struct GroverPlan {
    std::uint64_t N = 0;  // search-space size
    std::uint64_t M = 0;  // number of solutions
    double theta = 0.0;   // full rotation per iteration, sin(θ/2) = √(M/N)
    int predicted_R = 0;  // round(acos√(M/N) / θ)
};

GroverPlan make_grover_plan(std::uint64_t N, std::uint64_t M);

// ⌈(π/4) √(N/M)⌉
int grover_iteration_cap(std::uint64_t N, std::uint64_t M);

// sin²((2k+1) θ/2).
double grover_search_2d(const GroverPlan& plan, int k);

// Exact state-vector simulation on n_qubits (<= 12): Walsh–Hadamard
// preparation, phase oracle on `marked`, inversion about the mean via two
// Walsh–Hadamard transforms. Returns the total probability on marked items.
double grover_search_full(int n_qubits, const std::vector<std::uint64_t>& marked, int k);

// M distinct items drawn uniformly from [0, 2^n_qubits).
std::vector<std::uint64_t> random_marked_set(int n_qubits, std::uint64_t M, RngStream& rng);

// In-place fast Walsh–Hadamard transform, normalized (an involution).
void walsh_hadamard(Vector& v);

struct DistinguishPlan {
    double D0 = 0.0;
    double theta_rs = 0.0;              // 2 asin(D0): angle between the Bloch directions
    double theta_rs_small_angle = 0.0;  // 2 D0
    double predicted_iters = 0.0;       // π / (16 D0)
};

DistinguishPlan plan_distinguish(double D0);

struct DistinguishResult {
    int iters_to_success = 0;
    std::vector<double> angle_trace;  // angle(r, s_k) for k = 0..iters_to_success
    double final_probability = 0.0;   // 1 - |⟨r|s_k⟩|² at success
};

// Repeats G = (2|s⟩⟨s| - I)(2|r⟩⟨r| - I) on |s⟩ until the Bloch angle
// 2 acos|⟨r|s_k⟩| between r and s_k reaches π/4. Each step adds 2 θ_rs.
// Throws std::invalid_argument for identical or orthogonal inputs.
DistinguishResult distinguish_sim(const PureState& r, const PureState& s, int max_iterations = 1000000);

// Qubit pair at trace distance D: |0⟩ and √(1-D²)|0⟩ + D|1⟩.
std::pair<PureState, PureState> pure_pair_at_distance(double D);

enum class DeviationDriver { identity, grover, random };

struct DeviationTrace {
    std::vector<int> k_values;
    std::vector<double> D_k;  // Σ_x ||ψ_k^x - ψ_k||²
    double worst_ratio = 0.0; // max_k D_k / 4k² over k >= 1
};

// Uniform start state on n_qubits (<= 8). Every x in [0, N) is queried with
// the phase oracle O_x before each driver unitary. Random drivers draw one
// Haar unitary per step from rng. Throws NumericalToleranceError if some
// D_k exceeds 4k² + 1e-9.
DeviationTrace bbbv_deviation(int n_qubits, DeviationDriver driver, int k_max, RngStream& rng);

}  // namespace ethq
