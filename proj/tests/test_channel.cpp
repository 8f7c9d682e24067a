#include "ethq/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ethq;

namespace {

double lifted_entropy_oracle(const CoarseState& cs, const GeneralizedBipartition& bp) {
    double s = shannon_entropy(cs.weights());
    for (std::size_t i = 0; i < cs.sectors.size(); ++i) {
        const SectorBlock& b = cs.sectors[i];
        if (b.state) s += b.weight * (von_neumann_entropy(*b.state) + std::log(static_cast<double>(bp.sector(i).d2)));
    }
    if (cs.null_state) s += cs.null_weight * von_neumann_entropy(*cs.null_state);
    return s;
}

const GeneralizedBipartition& mixed_layout() {
    static const GeneralizedBipartition bp = [] {
        RngStream rng(99);
        const GeneralizedBipartition raw = GeneralizedBipartition::from_shapes({{2, 2}, {1, 3}, {2, 1}}, 2);
        return raw.conjugated(haar_unitary(raw.ambient_dim(), rng).matrix());
    }();
    return bp;
}

}  // namespace

TEST(ApplyCir, ProductInputKeepsFirstFactor) {
    RngStream rng(1);
    const DensityMatrix r1 = random_density(2, rng), r2 = random_density(3, rng);
    const GeneralizedBipartition bp = GeneralizedBipartition::single_sector(2, 3);
    const CoarseState cs = apply_cir(DensityMatrix::product(r1, r2), bp);
    ASSERT_EQ(cs.sectors.size(), 1u);
    EXPECT_NEAR(cs.sectors[0].weight, 1.0, 1e-12);
    EXPECT_LT(max_abs(cs.sectors[0].state->matrix() - r1.matrix()), 1e-12);
}

TEST(ApplyCir, BellStateGivesMaximallyMixed) {
    Vector v = Vector::Zero(4);
    v(0) = v(3) = M_SQRT1_2;
    const CoarseState cs = apply_cir(DensityMatrix::from_pure(PureState(v)), GeneralizedBipartition::single_sector(2, 2));
    EXPECT_LT(max_abs(cs.sectors[0].state->matrix() - Matrix::Identity(2, 2) / 2.0), 1e-12);
}

TEST(ApplyCir, TwoSectorBlockArithmetic) {
    const GeneralizedBipartition bp = GeneralizedBipartition::from_shapes({{2, 2}, {1, 3}});
    const Matrix rho = 0.5 * bp.sector(0).projector / 4.0 + 0.5 * bp.sector(1).projector / 3.0;
    const CoarseState cs = apply_cir(DensityMatrix(rho), bp);
    EXPECT_NEAR(cs.sectors[0].weight, 0.5, 1e-12);
    EXPECT_NEAR(cs.sectors[1].weight, 0.5, 1e-12);
    EXPECT_LT(max_abs(cs.sectors[0].state->matrix() - Matrix::Identity(2, 2) / 2.0), 1e-12);
    EXPECT_NEAR(cs.sectors[1].state->matrix()(0, 0).real(), 1.0, 1e-12);
}

TEST(ApplyCir, EmptySectorIsFlagged) {
    const GeneralizedBipartition bp = GeneralizedBipartition::from_shapes({{2, 2}, {1, 3}});
    const CoarseState cs = apply_cir(DensityMatrix(bp.sector(0).projector / 4.0), bp);
    EXPECT_FALSE(cs.sectors[0].empty());
    EXPECT_TRUE(cs.sectors[1].empty());
    EXPECT_EQ(cs.sectors[1].weight, 0.0);
}

TEST(ApplyCir, DimensionMismatchThrows) {
    EXPECT_THROW(apply_cir(DensityMatrix::maximally_mixed(3), GeneralizedBipartition::single_sector(2, 2)),
                 std::invalid_argument);
}

TEST(ApplyCir, LinearTracePreservingAndPositive) {
    RngStream rng(2);
    const GeneralizedBipartition& bp = mixed_layout();
    const Index n = bp.ambient_dim();
    for (int i = 0; i < 200; ++i) {
        const DensityMatrix a = random_density(n, rng), b = random_density(n, rng);
        const double t = rng.uniform();
        const DensityMatrix mix(t * a.matrix() + (1.0 - t) * b.matrix());
        const CoarseState ca = apply_cir(a, bp), cb = apply_cir(b, bp), cm = apply_cir(mix, bp);
        EXPECT_NEAR(ca.total_weight(), 1.0, 1e-10);
        const Matrix combo = t * lift(ca, bp).matrix() + (1.0 - t) * lift(cb, bp).matrix();
        EXPECT_LT(max_abs(lift(cm, bp).matrix() - combo), 1e-10);
        for (const SectorBlock& s : ca.sectors) {
            ASSERT_TRUE(s.state);
            EXPECT_GE(s.state->eigenvalues().minCoeff(), -1e-12);
        }
    }
}

TEST(ApplyCir, NullBlockPassesThroughUntouched) {
    RngStream rng(3);
    const GeneralizedBipartition& bp = mixed_layout();
    const DensityMatrix rho = random_density(bp.ambient_dim(), rng);
    const CoarseState cs = apply_cir(rho, bp);
    const Matrix block = bp.null_iso().adjoint() * rho.matrix() * bp.null_iso();
    EXPECT_LT(max_abs(cs.null_weight * cs.null_state->matrix() - block), 1e-12);
}

TEST(ApplyCir, ExpectationsOnTheFirstFactorArePreserved) {
    RngStream rng(4);
    const GeneralizedBipartition& bp = mixed_layout();
    for (int i = 0; i < 20; ++i) {
        const DensityMatrix rho = random_density(bp.ambient_dim(), rng);
        const CoarseState cs = apply_cir(rho, bp);
        for (std::size_t s = 0; s < bp.sector_count(); ++s) {
            const Sector& sec = bp.sector(s);
            const Matrix o1 = random_hermitian(sec.d1, rng);
            const Matrix full = sec.iso * kron(o1, Matrix::Identity(sec.d2, sec.d2)) * sec.iso.adjoint();
            const double lhs = (full * rho.matrix()).trace().real();
            const double rhs = cs.sectors[s].weight * (o1 * cs.sectors[s].state->matrix()).trace().real();
            EXPECT_NEAR(lhs, rhs, 1e-10);
        }
    }
}

TEST(ApplyCir, LiftedChannelContracts) {
    RngStream rng(5);
    const GeneralizedBipartition& bp = mixed_layout();
    for (int i = 0; i < 100; ++i) {
        const DensityMatrix a = random_density(bp.ambient_dim(), rng), b = random_density(bp.ambient_dim(), rng);
        EXPECT_LE(trace_distance(lift(apply_cir(a, bp), bp), lift(apply_cir(b, bp), bp)), trace_distance(a, b) + 1e-9);
    }
}

TEST(Lift, ProductInputBecomesFirstFactorTimesMixed) {
    RngStream rng(6);
    const DensityMatrix r1 = random_density(3, rng), r2 = random_density(2, rng);
    const GeneralizedBipartition bp = GeneralizedBipartition::single_sector(3, 2);
    const DensityMatrix l = lift(apply_cir(DensityMatrix::product(r1, r2), bp), bp);
    EXPECT_LT(max_abs(l.matrix() - kron(r1.matrix(), Matrix::Identity(2, 2) / 2.0)), 1e-12);
}

TEST(Lift, MaximallyMixedRoundTrips) {
    const GeneralizedBipartition& bp = mixed_layout();
    const Index n = bp.ambient_dim();
    const DensityMatrix mixed = DensityMatrix::maximally_mixed(n);
    EXPECT_LT(max_abs(lift(apply_cir(mixed, bp), bp).matrix() - mixed.matrix()), 1e-12);
}

TEST(Lift, ApplyAfterLiftIsIdentityOnCoarseStates) {
    RngStream rng(7);
    const GeneralizedBipartition& bp = mixed_layout();
    for (int i = 0; i < 20; ++i) {
        const CoarseState cs = apply_cir(random_density(bp.ambient_dim(), rng), bp);
        EXPECT_LT(coarse_state_distance(apply_cir(lift(cs, bp), bp), cs), 1e-12);
    }
}

TEST(Lift, EntropyMatchesBlockAdditivity) {
    RngStream rng(8);
    const GeneralizedBipartition& bp = mixed_layout();
    for (int i = 0; i < 20; ++i) {
        const CoarseState cs = apply_cir(random_density(bp.ambient_dim(), rng), bp);
        EXPECT_NEAR(von_neumann_entropy(lift(cs, bp)), lifted_entropy_oracle(cs, bp), 1e-9);
    }
}

TEST(Lift, ShapeMismatchThrows) {
    const CoarseState cs = apply_cir(DensityMatrix::maximally_mixed(4), GeneralizedBipartition::single_sector(2, 2));
    EXPECT_THROW(lift(cs, GeneralizedBipartition::from_shapes({{2, 2}, {1, 1}})), std::invalid_argument);
}

TEST(MaxEntropy, IdentityOnlyGivesMaximallyMixed) {
    const OperatorAlgebra a = close_algebra({}, 3);
    RealVector r(1);
    r << 1.0 / std::sqrt(3.0);  // tr[(I/√3) ρ] for any ρ
    const MaxEntropyResult res = max_entropy_state(r, a);
    EXPECT_LT(max_abs(res.mes.matrix() - Matrix::Identity(3, 3) / 3.0), 1e-10);
}

TEST(MaxEntropy, DiagonalQubitConstraint) {
    // Basis {I/√2, Z/√2}: <Z> = 0.5 fixes diag(0.75, 0.25).
    Matrix id = Matrix::Identity(2, 2) / std::sqrt(2.0), z = Matrix::Zero(2, 2);
    z(0, 0) = M_SQRT1_2;
    z(1, 1) = -M_SQRT1_2;
    const OperatorAlgebra a(2, {id, z}, true);
    RealVector r(2);
    r << M_SQRT1_2, 0.5 * M_SQRT1_2;
    const MaxEntropyResult res = max_entropy_state(r, a);
    EXPECT_NEAR(res.mes.matrix()(0, 0).real(), 0.75, 1e-10);
    EXPECT_NEAR(res.mes.matrix()(1, 1).real(), 0.25, 1e-10);
    EXPECT_LT(std::abs(res.mes.matrix()(0, 1)), 1e-12);
    // ρ = exp(Ω - Σ λ_k B_k), evaluated on the diagonal.
    const double h00 = (res.lagrange_multipliers(0) + res.lagrange_multipliers(1)) * M_SQRT1_2;
    EXPECT_NEAR(std::exp(res.log_partition - h00), 0.75, 1e-10);
}

TEST(MaxEntropy, FirstFactorAlgebraGivesReducedTensorMixed) {
    RngStream rng(9);
    const GeneralizedBipartition bp = GeneralizedBipartition::single_sector(2, 3);
    const OperatorAlgebra a = algebra_from_bipartition(bp);
    const DensityMatrix rho = random_density(6, rng);
    const MaxEntropyResult res = max_entropy_state(algebra_expectations(rho, a), a);
    const Matrix want = kron(partial_trace(rho, 2, 3, Factor::first).matrix(), Matrix::Identity(3, 3) / 3.0);
    EXPECT_LT(max_abs(res.mes.matrix() - want), 1e-8);
    EXPECT_LE(res.residual, 1e-10);
}

TEST(MaxEntropy, WrongExpectationCountThrows) {
    EXPECT_THROW(max_entropy_state(RealVector::Zero(3), full_matrix_algebra(2)), std::invalid_argument);
}

TEST(MaxEntropy, UnreachableExpectationsFailToConverge) {
    // <E00> = 1.5 is outside the state space.
    Matrix e00 = Matrix::Zero(2, 2), e11 = Matrix::Zero(2, 2);
    e00(0, 0) = 1.0;
    e11(1, 1) = 1.0;
    RealVector r(2);
    r << 1.5, -0.5;
    MaxEntropyOptions opt;
    opt.max_iterations = 50;
    EXPECT_THROW(max_entropy_state(r, OperatorAlgebra(2, {e00, e11}, true), opt), NumericalToleranceError);
}

TEST(Jaynes, ChannelRouteMatchesMaxEntropyRoute) {
    RngStream rng(10);
    for (const auto& [d1, d2] : std::vector<std::pair<Index, Index>>{{2, 2}, {2, 4}, {3, 3}}) {
        const GeneralizedBipartition bp = GeneralizedBipartition::single_sector(d1, d2);
        const OperatorAlgebra a = algebra_from_bipartition(bp);
        for (int i = 0; i < 3; ++i) {
            const JaynesReport rep = verify_jaynes(random_density(d1 * d2, rng), bp, a);
            EXPECT_TRUE(rep.ok(1e-7)) << d1 << "x" << d2 << " deviation " << rep.deviation << " " << rep.message;
        }
    }
}

TEST(Jaynes, MultiSectorWithNullBlock) {
    RngStream rng(11);
    const GeneralizedBipartition& bp = mixed_layout();
    const OperatorAlgebra a = algebra_from_bipartition(bp);
    const JaynesReport rep = verify_jaynes(random_density(bp.ambient_dim(), rng), bp, a);
    EXPECT_TRUE(rep.ok(1e-7)) << rep.deviation << " " << rep.message;
}

TEST(Jaynes, ReportsSolverFailureInsteadOfThrowing) {
    const GeneralizedBipartition bp = GeneralizedBipartition::single_sector(2, 2);
    const OperatorAlgebra wrong = full_matrix_algebra(3);
    const JaynesReport rep = verify_jaynes(DensityMatrix::maximally_mixed(4), bp, wrong);
    EXPECT_FALSE(rep.converged);
    EXPECT_FALSE(rep.ok());
}

TEST(Jaynes, LiftMaximizesEntropyAmongMatchingStates) {
    RngStream rng(12);
    const GeneralizedBipartition bp = GeneralizedBipartition::single_sector(2, 3);
    const OperatorAlgebra a = algebra_from_bipartition(bp);
    const DensityMatrix rho = random_density(6, rng);
    const DensityMatrix lifted = lift(apply_cir(rho, bp), bp);
    const double s0 = von_neumann_entropy(lifted);
    for (int i = 0; i < 50; ++i) {
        Matrix h = random_hermitian(6, rng);
        h -= a.project(h);  // HS-orthogonal to A, so every algebra expectation is unchanged
        h = hermitian_part(h);
        const double eps = 0.05 * lifted.eigenvalues().minCoeff() / std::max(1e-300, (h.norm()));
        const DensityMatrix perturbed(lifted.matrix() + eps * h);
        EXPECT_LT(max_abs(Matrix((algebra_expectations(perturbed, a) - algebra_expectations(lifted, a)).cast<cplx>())), 1e-12);
        EXPECT_LE(von_neumann_entropy(perturbed), s0 + 1e-9);
    }
}
