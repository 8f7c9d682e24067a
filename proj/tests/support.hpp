// Shared generators for property tests.
#pragma once

#include "ethq/algebra.hpp"

#include <utility>
#include <vector>

namespace ethq::testing {

inline Matrix pauli(char which) {
    Matrix m = Matrix::Zero(2, 2);
    switch (which) {
        case 'x': m << 0, 1, 1, 0; break;
        case 'y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
        case 'z': m << 1, 0, 0, -1; break;
        default: m = Matrix::Identity(2, 2);
    }
    return m;
}

struct RandomAlgebraCase {
    std::vector<std::pair<Index, Index>> shapes;
    Index null_dim = 0;
    GeneralizedBipartition truth;
    OperatorAlgebra algebra{1, {}, false};
};

// Up to three sectors with d1, d2 in [1, 4], a null block of size [0, 4],
// total dimension <= 64, conjugated by a Haar unitary. The algebra is
// regenerated from two random elements of the block algebra.
inline RandomAlgebraCase random_algebra_case(RngStream& rng) {
    RandomAlgebraCase c;
    auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1)); };
    while (true) {
        c.shapes.clear();
        const int sectors = pick(1, 3);
        Index total = 0;
        for (int s = 0; s < sectors; ++s) {
            const Index d1 = pick(1, 4), d2 = pick(1, 4);
            c.shapes.emplace_back(d1, d2);
            total += d1 * d2;
        }
        c.null_dim = pick(0, 4);
        if (total + c.null_dim <= 64) break;
    }
    const GeneralizedBipartition layout = GeneralizedBipartition::from_shapes(c.shapes, c.null_dim);
    c.truth = layout.conjugated(haar_unitary(layout.ambient_dim(), rng).matrix());
    const OperatorAlgebra reference = algebra_from_bipartition(c.truth);
    c.algebra = close_algebra({reference.random_element(rng), reference.random_element(rng)}, layout.ambient_dim(),
                              1e-9, c.null_dim == 0);
    return c;
}

}  // namespace ethq::testing
