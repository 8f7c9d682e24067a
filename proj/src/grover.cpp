#include "ethq/grover.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ethq {

GroverPlan make_grover_plan(std::uint64_t N, std::uint64_t M) {
    if (N == 0 || M == 0 || M > N) throw std::invalid_argument("make_grover_plan: need 0 < M <= N");
    GroverPlan p;
    p.N = N;
    p.M = M;
    const double amp = std::sqrt(static_cast<double>(M) / static_cast<double>(N));
    p.theta = 2.0 * std::asin(std::min(amp, 1.0));
    p.predicted_R = static_cast<int>(std::lround(std::acos(std::min(amp, 1.0)) / p.theta));
    return p;
}

int grover_iteration_cap(std::uint64_t N, std::uint64_t M) {
    if (N == 0 || M == 0 || M > N) throw std::invalid_argument("grover_iteration_cap: need 0 < M <= N");
    return static_cast<int>(std::ceil(M_PI / 4.0 * std::sqrt(static_cast<double>(N) / static_cast<double>(M))));
}

double grover_search_2d(const GroverPlan& plan, int k) {
    if (k < 0) throw std::invalid_argument("grover_search_2d: k must be >= 0");
    const double s = std::sin((2.0 * k + 1.0) * plan.theta / 2.0);
    return s * s;
}

void walsh_hadamard(Vector& v) {
    const Index n = v.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("walsh_hadamard: length must be a power of two");
    for (Index h = 1; h < n; h <<= 1) {
        for (Index i = 0; i < n; i += 2 * h) {
            for (Index j = i; j < i + h; ++j) {
                const cplx a = v(j);
                const cplx b = v(j + h);
                v(j) = a + b;
                v(j + h) = a - b;
            }
        }
    }
    v /= std::sqrt(static_cast<double>(n));
}

double grover_search_full(int n_qubits, const std::vector<std::uint64_t>& marked, int k) {
    if (n_qubits < 1 || n_qubits > 12) throw std::invalid_argument("grover_search_full: need 1 <= n_qubits <= 12");
    if (k < 0) throw std::invalid_argument("grover_search_full: k must be >= 0");
    const Index N = Index{1} << n_qubits;
    std::vector<char> is_marked(static_cast<std::size_t>(N), 0);
    for (std::uint64_t x : marked) {
        if (x >= static_cast<std::uint64_t>(N)) throw std::invalid_argument("grover_search_full: marked item out of range");
        is_marked[x] = 1;
    }

    Vector psi = Vector::Zero(N);
    psi(0) = 1.0;
    walsh_hadamard(psi);
    for (int step = 0; step < k; ++step) {
        for (Index x = 0; x < N; ++x)
            if (is_marked[static_cast<std::size_t>(x)]) psi(x) = -psi(x);
        // H (2|0⟩⟨0| - I) H = 2|ψ⟩⟨ψ| - I
        walsh_hadamard(psi);
        for (Index x = 1; x < N; ++x) psi(x) = -psi(x);
        walsh_hadamard(psi);
    }
    double p = 0.0;
    for (Index x = 0; x < N; ++x)
        if (is_marked[static_cast<std::size_t>(x)]) p += std::norm(psi(x));
    return p;
}

std::vector<std::uint64_t> random_marked_set(int n_qubits, std::uint64_t M, RngStream& rng) {
    if (n_qubits < 1 || n_qubits > 20) throw std::invalid_argument("random_marked_set: need 1 <= n_qubits <= 20");
    const std::uint64_t N = std::uint64_t{1} << n_qubits;
    if (M > N) throw std::invalid_argument("random_marked_set: M exceeds N");
    std::vector<std::uint64_t> all(N);
    std::iota(all.begin(), all.end(), std::uint64_t{0});
    // Partial Fisher–Yates with an explicit draw so the result is portable.
    for (std::uint64_t i = 0; i < M; ++i) {
        const std::uint64_t j = i + rng.next_u64() % (N - i);
        std::swap(all[i], all[j]);
    }
    all.resize(M);
    std::sort(all.begin(), all.end());
    return all;
}

DistinguishPlan plan_distinguish(double D0) {
    if (!(D0 > 0.0 && D0 < 1.0)) throw std::invalid_argument("plan_distinguish: need 0 < D0 < 1");
    DistinguishPlan p;
    p.D0 = D0;
    p.theta_rs = 2.0 * std::asin(D0);
    p.theta_rs_small_angle = 2.0 * D0;
    p.predicted_iters = M_PI / (16.0 * D0);
    return p;
}

DistinguishResult distinguish_sim(const PureState& r, const PureState& s, int max_iterations) {
    if (r.dim() != s.dim()) throw std::invalid_argument("distinguish_sim: dimension mismatch");
    const double overlap0 = std::abs(r.amplitudes().dot(s.amplitudes()));
    if (overlap0 >= 1.0 - 1e-15) throw std::invalid_argument("distinguish_sim: states are identical");
    if (overlap0 <= 1e-15) throw std::invalid_argument("distinguish_sim: states are already orthogonal");

    const Vector& rv = r.amplitudes();
    const Vector& sv = s.amplitudes();
    Vector cur = sv;
    auto bloch_angle = [&](const Vector& v) { return 2.0 * std::acos(std::min(1.0, std::abs(rv.dot(v)))); };

    DistinguishResult out;
    constexpr double target = M_PI / 4.0;
    for (int k = 0;; ++k) {
        const double angle = bloch_angle(cur);
        out.angle_trace.push_back(angle);
        if (angle >= target - 1e-12) {
            out.iters_to_success = k;
            out.final_probability = 1.0 - std::norm(rv.dot(cur));
            return out;
        }
        if (k == max_iterations) break;
        cur = 2.0 * rv * rv.dot(cur) - cur;  // reflect about r
        cur = 2.0 * sv * sv.dot(cur) - cur;  // reflect about s
        cur.normalize();
    }
    throw NumericalToleranceError("distinguish_sim: iteration limit reached", 0.0);
}

std::pair<PureState, PureState> pure_pair_at_distance(double D) {
    if (!(D > 0.0 && D < 1.0)) throw std::invalid_argument("pure_pair_at_distance: need 0 < D < 1");
    Vector s(2);
    s << std::sqrt(1.0 - D * D), D;
    return {PureState::basis(2, 0), PureState::normalized(s)};
}

DeviationTrace bbbv_deviation(int n_qubits, DeviationDriver driver, int k_max, RngStream& rng) {
    if (n_qubits < 1 || n_qubits > 8) throw std::invalid_argument("bbbv_deviation: need 1 <= n_qubits <= 8");
    if (k_max < 0) throw std::invalid_argument("bbbv_deviation: k_max must be >= 0");
    const Index N = Index{1} << n_qubits;
    const Vector uniform = Vector::Constant(N, 1.0 / std::sqrt(static_cast<double>(N)));

    // Column x holds ψ_k^x; the free run is ψ_k.
    Matrix queried = uniform.replicate(1, N);
    Vector free_run = uniform;
    DeviationTrace trace;
    auto record = [&](int k) {
        const double d = (queried.colwise() - free_run).squaredNorm();
        trace.k_values.push_back(k);
        trace.D_k.push_back(d);
        if (k > 0) {
            const double bound = 4.0 * k * k;
            trace.worst_ratio = std::max(trace.worst_ratio, d / bound);
            if (d > bound + 1e-9) {
                std::ostringstream os;
                os << "bbbv_deviation: D_" << k << " = " << d << " exceeds 4k^2 = " << bound;
                throw NumericalToleranceError(os.str(), d - bound);
            }
        }
    };
    record(0);
    for (int k = 1; k <= k_max; ++k) {
        for (Index x = 0; x < N; ++x) queried(x, x) = -queried(x, x);
        switch (driver) {
            case DeviationDriver::identity:
                break;
            case DeviationDriver::grover: {
                // 2|u⟩⟨u| - I with u the uniform state.
                const Eigen::RowVectorXcd proj = uniform.adjoint() * queried;
                queried = 2.0 * uniform * proj - queried;
                free_run = 2.0 * uniform * uniform.dot(free_run) - free_run;
                break;
            }
            case DeviationDriver::random: {
                const Operator u = haar_unitary(N, rng);
                queried = u.matrix() * queried;
                free_run = u.matrix() * free_run;
                break;
            }
        }
        record(k);
    }
    return trace;
}

}  // namespace ethq
