// algebra.hpp: finite-dimensional *-algebras of operators, their commutants
// and centers, and the Wedderburn block decomposition into sectors
// H_{1,a} ⊗ H_{2,a} plus an inert null block H_0.

#pragma once

#include "ethq/qcore.hpp"

#include <utility>
#include <vector>

namespace ethq {

// A *-closed matrix algebra stored as a Hermitian basis, orthonormal under
// <M1, M2> = tr[M1 M2^dagger]. Real combinations of the basis give the
// Hermitian elements, complex combinations the whole algebra.
//
// contains_identity is false for algebras whose unit is a proper projection
// (operators that vanish on some subspace H_0).
class OperatorAlgebra {
public:
    OperatorAlgebra(Index dim, std::vector<Matrix> basis, bool contains_identity);

    Index dim() const noexcept { return dim_; }
    Index size() const noexcept { return static_cast<Index>(basis_.size()); }
    const std::vector<Matrix>& basis() const noexcept { return basis_; }
    bool contains_identity() const noexcept { return contains_identity_; }

    // c_k = tr[X B_k^dagger]
    Vector coefficients(const Matrix& x) const;
    Matrix element(const Vector& coefficients) const;
    Matrix element(const RealVector& coefficients) const;
    // Hilbert–Schmidt orthogonal projection onto the span.
    Matrix project(const Matrix& x) const;
    // Frobenius norm of the component of x orthogonal to the span.
    double span_residual(const Matrix& x) const;
    // Random Hermitian element: Gaussian real combination of the basis.
    Matrix random_element(RngStream& rng) const;

private:
    Index dim_;
    std::vector<Matrix> basis_;
    bool contains_identity_;
};

struct AlgebraCheck {
    double orthonormality = 0.0;    // max |G - I| of the HS Gram matrix
    double adjoint_closure = 0.0;   // worst span residual of B^dagger
    double product_closure = 0.0;   // worst span residual of B_i B_j
    double unit_residual = 0.0;     // span residual of I (or of the support projection)

    bool ok(double tol = 1e-8) const {
        return orthonormality <= tol && adjoint_closure <= tol && product_closure <= tol &&
               unit_residual <= tol;
    }
};

// Checks the algebra invariants on an arbitrary (possibly raw) basis.
AlgebraCheck verify_algebra(const OperatorAlgebra& a);

// Smallest *-algebra containing the generators (and the identity when
// unital). Alternates product augmentation with Hilbert–Schmidt
// Gram–Schmidt until one full pass adds nothing. Deterministic in the
// generator order.
OperatorAlgebra close_algebra(const std::vector<Matrix>& generators, Index dim, double tol = 1e-9,
                              bool unital = true);

// HS-orthonormal Hermitian basis of all d x d matrices (generalized Gell-Mann
// units: diagonal units, then symmetric and antisymmetric off-diagonal pairs).
std::vector<Matrix> hermitian_matrix_basis(Index d);

OperatorAlgebra full_matrix_algebra(Index d);

// Orthogonal projector onto the common support of all algebra elements.
Matrix support_projection(const OperatorAlgebra& a, double tol = 1e-9);

// {X : [X, M] = 0 for all M in A}. Dense solve, intended for dims <= 64.
OperatorAlgebra commutant(const OperatorAlgebra& a);

// A ∩ A', as an HS-orthonormal Hermitian basis.
OperatorAlgebra center(const OperatorAlgebra& a, RngStream& rng);

// ---- generalized bipartition --------------------------------------------

struct Sector {
    Matrix iso;        // ambient_dim x (d1*d2), column a*d2 + b ↔ |a⟩⊗|b⟩
    Index d1 = 0;
    Index d2 = 0;
    Matrix projector;  // iso iso^dagger
};

struct BipartitionCheck {
    Index dimension_sum = 0;        // Σ d1 d2 + dim H_0
    double completeness = 0.0;      // max |Π_0 + Σ Π_a - I|
    double orthogonality = 0.0;     // max |Π_a Π_b| over a != b (incl. Π_0)
    double isometry = 0.0;          // max |V^dagger V - I| over all blocks

    bool ok(Index ambient_dim, double tol = 1e-9) const {
        return dimension_sum == ambient_dim && completeness <= tol && orthogonality <= tol &&
               isometry <= tol;
    }
};

class GeneralizedBipartition {
public:
    GeneralizedBipartition() = default;
    GeneralizedBipartition(Index ambient_dim, std::vector<Sector> sectors, Matrix null_iso);

    // Sectors laid out contiguously in the standard basis, null block last.
    static GeneralizedBipartition from_shapes(const std::vector<std::pair<Index, Index>>& shapes,
                                              Index null_dim = 0);
    static GeneralizedBipartition single_sector(Index d1, Index d2) { return from_shapes({{d1, d2}}); }

    // Same decomposition transported by the unitary u: iso -> u iso.
    GeneralizedBipartition conjugated(const Matrix& u) const;

    Index ambient_dim() const noexcept { return ambient_dim_; }
    const std::vector<Sector>& sectors() const noexcept { return sectors_; }
    const Sector& sector(std::size_t i) const { return sectors_.at(i); }
    std::size_t sector_count() const noexcept { return sectors_.size(); }
    const Matrix& null_iso() const noexcept { return null_iso_; }
    Index null_dim() const noexcept { return null_iso_.cols(); }

    std::vector<std::pair<Index, Index>> shapes() const;
    Index algebra_dimension() const;    // Σ d1^2
    Index commutant_dimension() const;  // Σ d2^2 + d0^2

    BipartitionCheck check() const;

private:
    Index ambient_dim_ = 0;
    std::vector<Sector> sectors_;
    Matrix null_iso_;
};

// ⊕_a L(C^{d1}) ⊗ I_{d2} ⊕ 0, transported by each sector isometry.
OperatorAlgebra algebra_from_bipartition(const GeneralizedBipartition& bp);

// Worst deviation of the basis from the block form ⊕ M1 ⊗ I2 ⊕ 0 in the
// coordinates given by bp (off-sector blocks and H_0 rows must vanish).
double block_form_residual(const OperatorAlgebra& a, const GeneralizedBipartition& bp);

// Wedderburn decomposition of A:
//  1. H_0 = kernel of the support projection;
//  2. center Z = A ∩ A';
//  3. eigenspaces of a random Hermitian central element are the sectors;
//  4. within a sector the eigenspaces of a random Hermitian element of A are
//     copies |u_a⟩ ⊗ C^{d2}; a second random element supplies the matrix
//     units that align those copies into a product basis.
// Throws NumericalToleranceError when the block-form residual exceeds tol or
// the dimension count Σ d1^2 != dim A.
GeneralizedBipartition wedderburn_decompose(const OperatorAlgebra& a, RngStream& rng, double tol = 1e-8);

// ½ max tr[(ρ-σ) O] over Hermitian O in A with -I <= O <= I, evaluated
// exactly as ½ ||P_A(ρ-σ)||_1 where P_A is the HS projection onto A.
double trace_distance_variational(const DensityMatrix& rho, const DensityMatrix& sigma,
                                  const OperatorAlgebra& a);
// Same quantity, with the trace norm of the projection taken block by block
// in the Wedderburn coordinates of bp (bp must decompose a).
double trace_distance_variational(const DensityMatrix& rho, const DensityMatrix& sigma,
                                  const OperatorAlgebra& a, const GeneralizedBipartition& bp);

}  // namespace ethq
