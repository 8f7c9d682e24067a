#include "ethq/algebra.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace ethq;
using ethq::testing::pauli;

namespace {

Matrix pad(const Matrix& m, Index extra) {
    Matrix out = Matrix::Zero(m.rows() + extra, m.cols() + extra);
    out.topLeftCorner(m.rows(), m.cols()) = m;
    return out;
}

OperatorAlgebra diagonal_algebra(Index d) {
    std::vector<Matrix> gens;
    for (Index i = 0; i < d; ++i) {
        Matrix e = Matrix::Zero(d, d);
        e(i, i) = 1.0;
        gens.push_back(e);
    }
    return close_algebra(gens, d);
}

// Brute-force span dimension of all words of length <= 4 in the generators and I.
Index word_span_dimension(const std::vector<Matrix>& gens, Index d) {
    std::vector<Matrix> words = {Matrix::Identity(d, d)};
    std::vector<Matrix> frontier = words;
    for (int len = 0; len < 4; ++len) {
        std::vector<Matrix> next;
        for (const Matrix& w : frontier)
            for (const Matrix& g : gens) next.push_back(w * g);
        words.insert(words.end(), next.begin(), next.end());
        frontier = std::move(next);
    }
    Matrix stacked(d * d, static_cast<Index>(words.size()));
    for (std::size_t i = 0; i < words.size(); ++i) stacked.col(static_cast<Index>(i)) = words[i].reshaped();
    Eigen::FullPivLU<Matrix> lu(stacked);
    lu.setThreshold(1e-9);
    return lu.rank();
}

}  // namespace

TEST(CloseAlgebra, EmptyGeneratorsGiveTheIdentitySpan) {
    const OperatorAlgebra a = close_algebra({}, 3);
    EXPECT_EQ(a.size(), 1);
    EXPECT_TRUE(verify_algebra(a).ok());
}

TEST(CloseAlgebra, PauliPairOnFirstFactorGivesL2TensorI) {
    const Matrix id2 = Matrix::Identity(2, 2);
    const std::vector<Matrix> gens = {kron(pauli('x'), id2), kron(pauli('z'), id2)};
    const OperatorAlgebra a = close_algebra(gens, 4);
    EXPECT_EQ(a.size(), 4);
    EXPECT_EQ(a.size(), word_span_dimension(gens, 4));
    EXPECT_TRUE(verify_algebra(a).ok());
    // Every element is M ⊗ I: the span contains I ⊗ nothing else.
    EXPECT_GT(a.span_residual(kron(id2, pauli('x'))), 0.5);
}

TEST(CloseAlgebra, PauliPairGeneratesTheFullQubitAlgebra) {
    const std::vector<Matrix> gens = {pauli('x'), pauli('z')};
    const OperatorAlgebra a = close_algebra(gens, 2);
    EXPECT_EQ(a.size(), 4);
    EXPECT_EQ(a.size(), word_span_dimension(gens, 2));
}

TEST(CloseAlgebra, NonHermitianGeneratorIsStarClosed) {
    Matrix raise = Matrix::Zero(3, 3);
    raise(0, 1) = 1.0;
    const OperatorAlgebra a = close_algebra({raise}, 3);
    // Generated by E01 and E10 plus I: L(C^2) ⊕ C.
    EXPECT_EQ(a.size(), 5);
    EXPECT_TRUE(verify_algebra(a).ok());
}

TEST(CloseAlgebra, GeneratorDimensionMismatchThrows) {
    EXPECT_THROW(close_algebra({pauli('x')}, 3), std::invalid_argument);
}

TEST(CloseAlgebra, DeterministicInGeneratorOrder) {
    RngStream rng(1);
    const std::vector<Matrix> gens = {random_hermitian(4, rng), random_hermitian(4, rng)};
    const OperatorAlgebra a = close_algebra(gens, 4), b = close_algebra(gens, 4);
    ASSERT_EQ(a.size(), b.size());
    for (Index k = 0; k < a.size(); ++k) EXPECT_EQ(a.basis()[k], b.basis()[k]);
}

TEST(VerifyAlgebra, FlagsANonClosedBasis) {
    const Matrix x = pauli('x') / std::sqrt(2.0), z = pauli('z') / std::sqrt(2.0);
    const Matrix id = Matrix::Identity(2, 2) / std::sqrt(2.0);
    const OperatorAlgebra broken(2, {id, x, z}, true);  // xz ∝ y is missing
    EXPECT_FALSE(verify_algebra(broken).ok());
    EXPECT_GT(verify_algebra(broken).product_closure, 0.5);
}

TEST(Commutant, OfTheIdentityIsEverything) {
    EXPECT_EQ(commutant(close_algebra({}, 3)).size(), 9);
}

TEST(Commutant, OfL2TensorIIsITensorL2) {
    const Matrix id2 = Matrix::Identity(2, 2);
    const OperatorAlgebra a = close_algebra({kron(pauli('x'), id2), kron(pauli('z'), id2)}, 4);
    const OperatorAlgebra c = commutant(a);
    ASSERT_EQ(c.size(), 4);
    for (char p : {'x', 'y', 'z'}) EXPECT_LT(c.span_residual(kron(id2, pauli(p))), 1e-9);
}

TEST(Commutant, OfDiagonalAlgebraIsDiagonal) {
    const OperatorAlgebra c = commutant(diagonal_algebra(3));
    EXPECT_EQ(c.size(), 3);
    for (const Matrix& b : c.basis()) EXPECT_LT(max_abs(b - Matrix(b.diagonal().asDiagonal())), 1e-9);
}

TEST(Commutant, BicommutantIsTheAlgebraPlusTheNullProjector) {
    // A' contains all of L(H_0), so A'' meets H_0 only in multiples of Π_0.
    const GeneralizedBipartition bp = GeneralizedBipartition::from_shapes({{2, 2}, {1, 3}}, 2);
    const OperatorAlgebra a = close_algebra(algebra_from_bipartition(bp).basis(), bp.ambient_dim(), 1e-9, false);
    const OperatorAlgebra cc = commutant(commutant(a));
    EXPECT_EQ(cc.size(), bp.algebra_dimension() + 1);
    for (const Matrix& b : a.basis()) EXPECT_LT(cc.span_residual(b), 1e-8);
    EXPECT_LT(cc.span_residual(projector_onto(bp.null_iso())), 1e-8);
}

TEST(Commutant, BicommutantOfAUnitalAlgebraIsItself) {
    const GeneralizedBipartition bp = GeneralizedBipartition::from_shapes({{2, 2}, {1, 3}, {3, 1}});
    const OperatorAlgebra a = algebra_from_bipartition(bp);
    const OperatorAlgebra cc = commutant(commutant(a));
    EXPECT_EQ(cc.size(), bp.algebra_dimension());
    EXPECT_EQ(commutant(a).size(), bp.commutant_dimension());
}

TEST(Center, OfSectorAlgebraIsSpannedBySectorProjectors) {
    RngStream rng(3);
    const GeneralizedBipartition bp = GeneralizedBipartition::from_shapes({{2, 1}, {1, 2}, {2, 2}});
    const OperatorAlgebra z = center(algebra_from_bipartition(bp), rng);
    ASSERT_EQ(z.size(), 3);
    for (const Sector& s : bp.sectors()) EXPECT_LT(z.span_residual(s.projector), 1e-9);
}

TEST(Wedderburn, FullAlgebraIsOneSectorWithTrivialSecondFactor) {
    RngStream rng(4);
    const GeneralizedBipartition bp = wedderburn_decompose(full_matrix_algebra(4), rng);
    ASSERT_EQ(bp.sector_count(), 1u);
    EXPECT_EQ(bp.sector(0).d1, 4);
    EXPECT_EQ(bp.sector(0).d2, 1);
    EXPECT_EQ(bp.null_dim(), 0);
}

TEST(Wedderburn, DiagonalAlgebraSplitsIntoOneDimensionalSectors) {
    RngStream rng(5);
    const GeneralizedBipartition bp = wedderburn_decompose(diagonal_algebra(3), rng);
    ASSERT_EQ(bp.sector_count(), 3u);
    for (const Sector& s : bp.sectors()) {
        EXPECT_EQ(s.d1, 1);
        EXPECT_EQ(s.d2, 1);
    }
    EXPECT_TRUE(bp.check().ok(3));
}

TEST(Wedderburn, PaddedQubitTensorIdentityHasANullBlock) {
    RngStream rng(6);
    const Matrix id2 = Matrix::Identity(2, 2);
    const OperatorAlgebra a =
        close_algebra({pad(kron(pauli('x'), id2), 1), pad(kron(pauli('z'), id2), 1)}, 5, 1e-9, false);
    EXPECT_EQ(a.size(), 4);
    const GeneralizedBipartition bp = wedderburn_decompose(a, rng);
    ASSERT_EQ(bp.sector_count(), 1u);
    EXPECT_EQ(bp.sector(0).d1, 2);
    EXPECT_EQ(bp.sector(0).d2, 2);
    EXPECT_EQ(bp.null_dim(), 1);
    EXPECT_NEAR(std::abs(bp.null_iso()(4, 0)), 1.0, 1e-9);
    EXPECT_LE(block_form_residual(a, bp), 1e-8);
}

TEST(Wedderburn, RandomAlgebrasSatisfyAllInvariants) {
    RngStream rng(7);
    for (int trial = 0; trial < 8; ++trial) {
        const auto c = ethq::testing::random_algebra_case(rng);
        const GeneralizedBipartition bp = wedderburn_decompose(c.algebra, rng);
        auto got = bp.shapes();
        auto want = c.shapes;
        std::sort(got.begin(), got.end());
        std::sort(want.begin(), want.end());
        EXPECT_EQ(got, want) << "trial " << trial;
        EXPECT_EQ(bp.null_dim(), c.null_dim);
        EXPECT_TRUE(bp.check().ok(bp.ambient_dim()));
        EXPECT_LE(block_form_residual(c.algebra, bp), 1e-8);
        EXPECT_EQ(bp.algebra_dimension(), c.algebra.size());
        EXPECT_EQ(bp.commutant_dimension(), commutant(c.algebra).size());
        // Rebuilding from the recovered blocks spans the same algebra.
        const OperatorAlgebra rebuilt = algebra_from_bipartition(bp);
        for (const Matrix& b : c.algebra.basis()) EXPECT_LE(rebuilt.span_residual(b), 1e-8);
    }
}

TEST(Wedderburn, FixedSeedIsDeterministic) {
    const GeneralizedBipartition layout = GeneralizedBipartition::from_shapes({{2, 3}, {1, 2}});
    const OperatorAlgebra a = algebra_from_bipartition(layout);
    RngStream r1(8), r2(8);
    const GeneralizedBipartition b1 = wedderburn_decompose(a, r1), b2 = wedderburn_decompose(a, r2);
    ASSERT_EQ(b1.sector_count(), b2.sector_count());
    for (std::size_t i = 0; i < b1.sector_count(); ++i) EXPECT_EQ(b1.sector(i).iso, b2.sector(i).iso);
}

TEST(Wedderburn, NonAlgebraInputIsRejected) {
    RngStream rng(9);
    const Matrix x = pauli('x') / std::sqrt(2.0), z = pauli('z') / std::sqrt(2.0);
    const Matrix id = Matrix::Identity(2, 2) / std::sqrt(2.0);
    EXPECT_THROW(wedderburn_decompose(OperatorAlgebra(2, {id, x, z}, true), rng), NumericalToleranceError);
}

TEST(Bipartition, FromShapesLaysOutContiguousBlocks) {
    const GeneralizedBipartition bp = GeneralizedBipartition::from_shapes({{2, 2}, {1, 3}}, 1);
    EXPECT_EQ(bp.ambient_dim(), 8);
    EXPECT_TRUE(bp.check().ok(8));
    EXPECT_EQ(bp.algebra_dimension(), 5);
    EXPECT_EQ(bp.commutant_dimension(), 4 + 9 + 1);
    EXPECT_THROW(GeneralizedBipartition::from_shapes({{0, 2}}), std::invalid_argument);
}

TEST(VariationalDistance, FullAlgebraEqualsTraceDistance) {
    RngStream rng(10);
    const OperatorAlgebra full = full_matrix_algebra(4);
    for (int i = 0; i < 10; ++i) {
        const DensityMatrix r = random_density(4, rng), s = random_density(4, rng);
        EXPECT_NEAR(trace_distance_variational(r, s, full), trace_distance(r, s), 1e-10);
    }
}

TEST(VariationalDistance, IdentityOnlyAlgebraSeesNothing) {
    RngStream rng(11);
    const DensityMatrix r = random_density(3, rng), s = random_density(3, rng);
    EXPECT_NEAR(trace_distance_variational(r, s, close_algebra({}, 3)), 0.0, 1e-12);
}

TEST(VariationalDistance, FirstFactorAlgebraMatchesGridSearch) {
    RngStream rng(12);
    const GeneralizedBipartition bp = GeneralizedBipartition::single_sector(2, 2);
    const OperatorAlgebra a = algebra_from_bipartition(bp);
    const Matrix id2 = Matrix::Identity(2, 2);
    for (int trial = 0; trial < 3; ++trial) {
        const DensityMatrix r = random_density(4, rng), s = random_density(4, rng);
        const double exact = trace_distance_variational(r, s, a);
        EXPECT_NEAR(trace_distance_variational(r, s, a, bp), exact, 1e-12);
        EXPECT_NEAR(exact, trace_distance(partial_trace(r, 2, 2, Factor::first), partial_trace(s, 2, 2, Factor::first)),
                    1e-10);
        // Dense grid over -I <= O <= I: O = c0 I + c·σ with |c0| + |c| <= 1.
        double best = 0.0;
        const int n = 24;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= 2 * n; ++j) {
                const double th = M_PI * i / n, ph = M_PI * j / n;
                const Matrix dir = std::sin(th) * std::cos(ph) * pauli('x') + std::sin(th) * std::sin(ph) * pauli('y') +
                                   std::cos(th) * pauli('z');
                const Matrix o = kron(dir, id2);
                best = std::max(best, 0.5 * (r.matrix() - s.matrix()).cwiseProduct(o.transpose()).sum().real());
            }
        EXPECT_LE(best, exact + 1e-12);
        EXPECT_GE(best, exact * 0.99);
    }
}

TEST(VariationalDistance, NonUnitalAlgebraIsRejected) {
    RngStream rng(13);
    const GeneralizedBipartition bp = GeneralizedBipartition::from_shapes({{2, 1}}, 1);
    const DensityMatrix r = random_density(3, rng), s = random_density(3, rng);
    EXPECT_THROW(trace_distance_variational(r, s, algebra_from_bipartition(bp)), std::invalid_argument);
}
