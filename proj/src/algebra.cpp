#include "ethq/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

namespace ethq {

namespace {

cplx hs_inner(const Matrix& a, const Matrix& b) { return a.cwiseProduct(b.conjugate()).sum(); }

// Orthonormal Hermitian basis grown by Gram–Schmidt under the HS inner
// product. For Hermitian matrices the inner product is real, so the span
// stays closed under adjoints.
class HermitianSpan {
public:
    HermitianSpan(Index dim, double tol) : dim_(dim), tol_(tol) {}

    bool add_hermitian(Matrix h) {
        const double scale = h.norm();
        if (scale <= tol_) return false;
        h /= scale;
        for (int pass = 0; pass < 2; ++pass) {
            for (const Matrix& b : basis_) h -= hs_inner(h, b).real() * b;
        }
        const double n = h.norm();
        if (n <= tol_) return false;
        basis_.push_back(hermitian_part(h / n));
        return true;
    }

    // Adds the Hermitian and anti-Hermitian parts of m; returns the growth.
    int add_any(const Matrix& m) {
        int grown = 0;
        grown += add_hermitian(hermitian_part(m)) ? 1 : 0;
        grown += add_hermitian(cplx(0.0, -1.0) * 0.5 * (m - m.adjoint())) ? 1 : 0;
        return grown;
    }

    std::size_t size() const noexcept { return basis_.size(); }
    const Matrix& operator[](std::size_t i) const { return basis_[i]; }
    std::vector<Matrix> release() { return std::move(basis_); }
    Index dim() const noexcept { return dim_; }

private:
    Index dim_;
    double tol_;
    std::vector<Matrix> basis_;
};

struct Cluster {
    Index begin = 0;
    Index size = 0;
    double value = 0.0;  // smallest eigenvalue in the cluster
};

// Groups ascending eigenvalues whose neighbour gap is <= threshold.
std::vector<Cluster> cluster_eigenvalues(const RealVector& ev, double threshold) {
    std::vector<Cluster> out;
    for (Index i = 0; i < ev.size(); ++i) {
        if (out.empty() || ev(i) - ev(i - 1) > threshold) {
            out.push_back({i, 1, ev(i)});
        } else {
            ++out.back().size;
        }
    }
    return out;
}

double smallest_gap(const RealVector& ev, const std::vector<Cluster>& clusters) {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t c = 1; c < clusters.size(); ++c) {
        g = std::min(g, ev(clusters[c].begin) - ev(clusters[c].begin - 1));
    }
    return g;
}

double spectral_range(const RealVector& ev) { return ev.size() ? ev.maxCoeff() - ev.minCoeff() : 0.0; }

double commutes_residual(const Matrix& x, const OperatorAlgebra& a) {
    double worst = 0.0;
    for (const Matrix& b : a.basis()) worst = std::max(worst, max_abs(x * b - b * x));
    return worst;
}

// Columns spanning the eigenspace of a cluster.
Matrix cluster_columns(const Matrix& vecs, const Cluster& c) { return vecs.middleCols(c.begin, c.size); }

}  // namespace

// ---- OperatorAlgebra -----------------------------------------------------

OperatorAlgebra::OperatorAlgebra(Index dim, std::vector<Matrix> basis, bool contains_identity)
    : dim_(dim), basis_(std::move(basis)), contains_identity_(contains_identity) {
    if (dim_ <= 0) throw std::invalid_argument("OperatorAlgebra: dimension must be positive");
    for (const Matrix& b : basis_) {
        if (b.rows() != dim_ || b.cols() != dim_) {
            throw std::invalid_argument("OperatorAlgebra: basis element dimension mismatch");
        }
    }
}

Vector OperatorAlgebra::coefficients(const Matrix& x) const {
    Vector c(size());
    for (Index k = 0; k < size(); ++k) c(k) = hs_inner(x, basis_[static_cast<std::size_t>(k)]);
    return c;
}

Matrix OperatorAlgebra::element(const Vector& c) const {
    Matrix out = Matrix::Zero(dim_, dim_);
    for (Index k = 0; k < size(); ++k) out += c(k) * basis_[static_cast<std::size_t>(k)];
    return out;
}

Matrix OperatorAlgebra::element(const RealVector& c) const {
    Matrix out = Matrix::Zero(dim_, dim_);
    for (Index k = 0; k < size(); ++k) out += c(k) * basis_[static_cast<std::size_t>(k)];
    return out;
}

Matrix OperatorAlgebra::project(const Matrix& x) const { return element(coefficients(x)); }

double OperatorAlgebra::span_residual(const Matrix& x) const { return (x - project(x)).norm(); }

Matrix OperatorAlgebra::random_element(RngStream& rng) const {
    RealVector g(size());
    for (Index k = 0; k < size(); ++k) g(k) = rng.normal();
    return element(g);
}

AlgebraCheck verify_algebra(const OperatorAlgebra& a) {
    AlgebraCheck chk;
    const auto& b = a.basis();
    for (std::size_t i = 0; i < b.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const cplx g = hs_inner(b[i], b[j]);
            chk.orthonormality = std::max(chk.orthonormality, std::abs(g - cplx(i == j ? 1.0 : 0.0)));
        }
        chk.adjoint_closure = std::max(chk.adjoint_closure, a.span_residual(b[i].adjoint()));
        for (std::size_t j = i; j < b.size(); ++j) {
            chk.product_closure = std::max(chk.product_closure, a.span_residual(b[i] * b[j]));
        }
    }
    const Matrix unit = a.contains_identity() ? Matrix::Identity(a.dim(), a.dim()) : support_projection(a);
    chk.unit_residual = a.size() ? a.span_residual(unit) : unit.norm();
    return chk;
}

OperatorAlgebra close_algebra(const std::vector<Matrix>& generators, Index dim, double tol, bool unital) {
    for (const Matrix& g : generators) {
        if (g.rows() != dim || g.cols() != dim) throw std::invalid_argument("close_algebra: generator dimension mismatch");
    }
    HermitianSpan span(dim, tol);
    if (unital) span.add_hermitian(Matrix::Identity(dim, dim));
    for (const Matrix& g : generators) {
        const double n = g.norm();
        if (n > 0.0) span.add_any(g / n);
    }
    const std::size_t cap = static_cast<std::size_t>(dim * dim);
    std::size_t closed = 0;  // all pairs among the first `closed` elements are processed
    while (true) {
        const std::size_t n = span.size();
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i <= j; ++i) {
                if (j < closed) continue;
                // B_j B_i = (B_i B_j)^dagger, so one ordering suffices.
                span.add_any(span[i] * span[j]);
                if (span.size() > cap) {
                    throw NumericalToleranceError("close_algebra: span exceeded d^2 (internal error)",
                                                  static_cast<double>(span.size()));
                }
            }
        }
        closed = n;
        if (span.size() == n) break;
    }
    return OperatorAlgebra(dim, span.release(), unital);
}

std::vector<Matrix> hermitian_matrix_basis(Index d) {
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(d * d));
    for (Index i = 0; i < d; ++i) {
        Matrix e = Matrix::Zero(d, d);
        e(i, i) = 1.0;
        out.push_back(std::move(e));
    }
    for (Index i = 0; i < d; ++i) {
        for (Index j = i + 1; j < d; ++j) {
            Matrix s = Matrix::Zero(d, d);
            s(i, j) = s(j, i) = M_SQRT1_2;
            out.push_back(std::move(s));
            Matrix t = Matrix::Zero(d, d);
            t(i, j) = cplx(0.0, -M_SQRT1_2);
            t(j, i) = cplx(0.0, M_SQRT1_2);
            out.push_back(std::move(t));
        }
    }
    return out;
}

OperatorAlgebra full_matrix_algebra(Index d) { return OperatorAlgebra(d, hermitian_matrix_basis(d), true); }

Matrix support_projection(const OperatorAlgebra& a, double tol) {
    const Index d = a.dim();
    Matrix s = Matrix::Zero(d, d);
    for (const Matrix& b : a.basis()) s += b * b.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(s));
    const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
    Matrix p = Matrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) {
        if (es.eigenvalues()(i) > tol * std::max(top, 1.0)) p += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    }
    return p;
}

OperatorAlgebra commutant(const OperatorAlgebra& a) {
    const Index d = a.dim();
    if (a.size() == 0) return full_matrix_algebra(d);

    // Any X in A' commutes with a random Hermitian element R1 of A, hence is
    // block diagonal on the eigenspaces of R1. Further random elements pin
    // down the rest; the result is checked against every basis element.
    RngStream rng(0xC0117a47ULL, static_cast<std::uint64_t>(d));
    Matrix r1 = a.random_element(rng);
    r1 /= r1.norm();
    Eigen::SelfAdjointEigenSolver<Matrix> es(r1);
    const Matrix& w = es.eigenvectors();
    const double scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    const std::vector<Cluster> blocks = cluster_eigenvalues(es.eigenvalues(), 1e-8 * scale);

    Index unknowns = 0;
    for (const Cluster& c : blocks) unknowns += c.size * c.size;
    if (static_cast<double>(unknowns) * static_cast<double>(d * d) > 6.0e7) {
        throw std::invalid_argument("commutant: problem too large for the dense solver");
    }

    std::vector<Matrix> constraints;
    for (int attempt = 0; attempt < 6; ++attempt) {
        Matrix c = a.random_element(rng);
        constraints.push_back(w.adjoint() * (c / c.norm()) * w);

        Matrix gram = Matrix::Zero(unknowns, unknowns);
        for (const Matrix& ct : constraints) {
            Matrix k = Matrix::Zero(d * d, unknowns);
            Index col = 0;
            for (const Cluster& blk : blocks) {
                for (Index p = 0; p < blk.size; ++p) {
                    for (Index q = 0; q < blk.size; ++q, ++col) {
                        // [E_{ip,iq}, C] = e_ip C(iq,:) - C(:,ip) e_iq^T, column-major vec.
                        const Index ip = blk.begin + p;
                        const Index iq = blk.begin + q;
                        Eigen::Map<Matrix> m(k.col(col).data(), d, d);
                        m.row(ip) += ct.row(iq);
                        m.col(iq) -= ct.col(ip);
                    }
                }
            }
            gram += k.adjoint() * k;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> gs(hermitian_part(gram));
        const double top = std::max(gs.eigenvalues().maxCoeff(), 1.0);

        HermitianSpan span(d, 1e-9);
        for (Index v = 0; v < unknowns; ++v) {
            if (gs.eigenvalues()(v) > 1e-12 * top) break;
            Matrix xt = Matrix::Zero(d, d);
            Index col = 0;
            for (const Cluster& blk : blocks) {
                for (Index p = 0; p < blk.size; ++p)
                    for (Index q = 0; q < blk.size; ++q, ++col) xt(blk.begin + p, blk.begin + q) = gs.eigenvectors()(col, v);
            }
            span.add_any(w * xt * w.adjoint());
        }
        std::vector<Matrix> basis = span.release();
        double worst = 0.0;
        for (const Matrix& x : basis) worst = std::max(worst, commutes_residual(x, a));
        if (worst <= 1e-8) {
            // The identity commutes with everything, so A' is always unital.
            return OperatorAlgebra(d, std::move(basis), true);
        }
    }
    throw NumericalToleranceError("commutant: random constraints failed to isolate the commutant", 1.0);
}

OperatorAlgebra center(const OperatorAlgebra& a, RngStream& rng) {
    const Index n = a.size();
    if (n == 0) return OperatorAlgebra(a.dim(), {}, false);

    // Z = Σ z_k B_k is central iff it commutes with the whole algebra; two
    // generic elements generate A, so we solve against random elements and
    // verify against the full basis afterwards.
    std::vector<Matrix> probes;
    for (int attempt = 0; attempt < 6; ++attempt) {
        Matrix r = a.random_element(rng);
        probes.push_back(r / r.norm());
        if (probes.size() < 2) continue;

        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
        for (const Matrix& p : probes) {
            std::vector<Matrix> comm;
            comm.reserve(static_cast<std::size_t>(n));
            for (const Matrix& b : a.basis()) comm.push_back(b * p - p * b);
            for (Index k = 0; k < n; ++k)
                for (Index l = k; l < n; ++l) {
                    const double g = hs_inner(comm[static_cast<std::size_t>(k)], comm[static_cast<std::size_t>(l)]).real();
                    gram(k, l) += g;
                    if (l != k) gram(l, k) += g;
                }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        const double top = std::max(es.eigenvalues().maxCoeff(), 1.0);
        std::vector<Matrix> basis;
        for (Index v = 0; v < n; ++v) {
            if (es.eigenvalues()(v) > 1e-12 * top) break;
            basis.push_back(hermitian_part(a.element(RealVector(es.eigenvectors().col(v)))));
        }
        double worst = 0.0;
        for (const Matrix& z : basis) worst = std::max(worst, commutes_residual(z, a));
        if (worst <= 1e-8) return OperatorAlgebra(a.dim(), std::move(basis), a.contains_identity());
    }
    throw NumericalToleranceError("center: random probes failed to isolate the center", 1.0);
}

// ---- GeneralizedBipartition ----------------------------------------------

GeneralizedBipartition::GeneralizedBipartition(Index ambient_dim, std::vector<Sector> sectors, Matrix null_iso)
    : ambient_dim_(ambient_dim), sectors_(std::move(sectors)), null_iso_(std::move(null_iso)) {
    if (null_iso_.size() == 0) null_iso_ = Matrix::Zero(ambient_dim_, 0);
    if (null_iso_.rows() != ambient_dim_) throw std::invalid_argument("GeneralizedBipartition: null block row mismatch");
    for (Sector& s : sectors_) {
        if (s.d1 <= 0 || s.d2 <= 0 || s.iso.rows() != ambient_dim_ || s.iso.cols() != s.d1 * s.d2) {
            throw std::invalid_argument("GeneralizedBipartition: sector shape mismatch");
        }
        s.projector = projector_onto(s.iso);
    }
}

GeneralizedBipartition GeneralizedBipartition::from_shapes(const std::vector<std::pair<Index, Index>>& shapes,
                                                           Index null_dim) {
    Index total = null_dim;
    for (const auto& [d1, d2] : shapes) {
        if (d1 <= 0 || d2 <= 0) throw std::invalid_argument("from_shapes: sector dimensions must be positive");
        total += d1 * d2;
    }
    if (total <= 0) throw std::invalid_argument("from_shapes: empty decomposition");
    const Matrix id = Matrix::Identity(total, total);
    std::vector<Sector> sectors;
    Index offset = 0;
    for (const auto& [d1, d2] : shapes) {
        sectors.push_back({id.middleCols(offset, d1 * d2), d1, d2, {}});
        offset += d1 * d2;
    }
    return GeneralizedBipartition(total, std::move(sectors), id.middleCols(offset, null_dim));
}

GeneralizedBipartition GeneralizedBipartition::conjugated(const Matrix& u) const {
    std::vector<Sector> s = sectors_;
    for (Sector& sec : s) sec.iso = u * sec.iso;
    return GeneralizedBipartition(ambient_dim_, std::move(s), u * null_iso_);
}

std::vector<std::pair<Index, Index>> GeneralizedBipartition::shapes() const {
    std::vector<std::pair<Index, Index>> out;
    for (const Sector& s : sectors_) out.emplace_back(s.d1, s.d2);
    return out;
}

Index GeneralizedBipartition::algebra_dimension() const {
    Index n = 0;
    for (const Sector& s : sectors_) n += s.d1 * s.d1;
    return n;
}

Index GeneralizedBipartition::commutant_dimension() const {
    Index n = null_dim() * null_dim();
    for (const Sector& s : sectors_) n += s.d2 * s.d2;
    return n;
}

BipartitionCheck GeneralizedBipartition::check() const {
    BipartitionCheck chk;
    chk.dimension_sum = null_dim();
    Matrix total = projector_onto(null_iso_);
    std::vector<const Matrix*> isos;
    for (const Sector& s : sectors_) {
        chk.dimension_sum += s.d1 * s.d2;
        total += s.projector;
        isos.push_back(&s.iso);
    }
    isos.push_back(&null_iso_);
    chk.completeness = max_abs(total - Matrix::Identity(ambient_dim_, ambient_dim_));
    for (std::size_t i = 0; i < isos.size(); ++i) {
        const Matrix& vi = *isos[i];
        if (vi.cols() == 0) continue;
        chk.isometry = std::max(chk.isometry, max_abs(vi.adjoint() * vi - Matrix::Identity(vi.cols(), vi.cols())));
        for (std::size_t j = i + 1; j < isos.size(); ++j) {
            if (isos[j]->cols() == 0) continue;
            chk.orthogonality = std::max(chk.orthogonality, max_abs(vi.adjoint() * *isos[j]));
        }
    }
    return chk;
}

OperatorAlgebra algebra_from_bipartition(const GeneralizedBipartition& bp) {
    std::vector<Matrix> basis;
    for (const Sector& s : bp.sectors()) {
        const Matrix id2 = Matrix::Identity(s.d2, s.d2) / std::sqrt(static_cast<double>(s.d2));
        for (const Matrix& h : hermitian_matrix_basis(s.d1)) basis.push_back(s.iso * kron(h, id2) * s.iso.adjoint());
    }
    return OperatorAlgebra(bp.ambient_dim(), std::move(basis), bp.null_dim() == 0);
}

double block_form_residual(const OperatorAlgebra& a, const GeneralizedBipartition& bp) {
    const Index n = bp.ambient_dim();
    if (a.dim() != n) throw std::invalid_argument("block_form_residual: dimension mismatch");
    Matrix frame(n, n);
    std::vector<Index> offsets;
    Index col = 0;
    for (const Sector& s : bp.sectors()) {
        offsets.push_back(col);
        frame.middleCols(col, s.iso.cols()) = s.iso;
        col += s.iso.cols();
    }
    if (col + bp.null_dim() != n) throw std::invalid_argument("block_form_residual: decomposition does not cover the space");
    frame.middleCols(col, bp.null_dim()) = bp.null_iso();

    double worst = 0.0;
    for (const Matrix& b : a.basis()) {
        Matrix t = frame.adjoint() * b * frame;
        for (std::size_t i = 0; i < bp.sector_count(); ++i) {
            const Sector& s = bp.sector(i);
            const Index m = s.d1 * s.d2;
            auto blk = t.block(offsets[i], offsets[i], m, m);
            const Matrix m1 = partial_trace(Matrix(blk), s.d1, s.d2, Factor::first) / static_cast<double>(s.d2);
            worst = std::max(worst, max_abs(blk - kron(m1, Matrix::Identity(s.d2, s.d2))));
            blk.setZero();
        }
        // Everything outside the diagonal sector blocks, H_0 included, must vanish.
        worst = std::max(worst, max_abs(t));
    }
    return worst;
}

GeneralizedBipartition wedderburn_decompose(const OperatorAlgebra& a, RngStream& rng, double tol) {
    const Index n = a.dim();
    if (a.size() == 0) throw std::invalid_argument("wedderburn_decompose: empty algebra");

    // 1. Support and null block.
    Matrix s = Matrix::Zero(n, n);
    for (const Matrix& b : a.basis()) s += b * b;
    Eigen::SelfAdjointEigenSolver<Matrix> ses(hermitian_part(s));
    const double stop = std::max(ses.eigenvalues().maxCoeff(), 1e-300);
    Index null_dim = 0;
    while (null_dim < n && ses.eigenvalues()(null_dim) <= 1e-9 * stop) ++null_dim;
    const Matrix null_iso = ses.eigenvectors().leftCols(null_dim);
    const Matrix support = ses.eigenvectors().rightCols(n - null_dim);

    // 2. Center.
    const OperatorAlgebra z = center(a, rng);
    const std::size_t sector_count = static_cast<std::size_t>(z.size());

    // 3. Sectors from a random central element.
    std::vector<Cluster> sector_clusters;
    Matrix sector_vecs;
    RealVector central_ev;
    for (int attempt = 0;; ++attempt) {
        if (attempt == 6) throw NumericalToleranceError("wedderburn_decompose: central spectrum stayed degenerate", 0.0);
        const Matrix zr = support.adjoint() * z.random_element(rng) * support;
        Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(zr));
        central_ev = es.eigenvalues();
        const double range = spectral_range(central_ev);
        const double thr = 1e-6 * range;
        sector_clusters = range > 1e-12 ? cluster_eigenvalues(central_ev, thr) : std::vector<Cluster>{{0, central_ev.size(), central_ev(0)}};
        if (sector_clusters.size() != sector_count) continue;
        if (sector_clusters.size() > 1 && smallest_gap(central_ev, sector_clusters) < 10.0 * thr) continue;
        sector_vecs = support * es.eigenvectors();
        break;
    }

    // 4. Product basis inside each sector.
    struct Found {
        Sector sector;
        double central_value;
    };
    std::vector<Found> found;
    for (const Cluster& sc : sector_clusters) {
        const Matrix v = cluster_columns(sector_vecs, sc);
        const Index m = sc.size;

        std::vector<Cluster> copies;
        Matrix copy_vecs;
        Index d1 = 0;
        Index d2 = 0;
        for (int attempt = 0;; ++attempt) {
            if (attempt == 6) throw NumericalToleranceError("wedderburn_decompose: sector spectrum stayed degenerate", 0.0);
            const Matrix h = v.adjoint() * a.random_element(rng) * v;
            Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
            const double range = spectral_range(es.eigenvalues());
            const double thr = 1e-6 * range;
            copies = range > 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())
                         ? cluster_eigenvalues(es.eigenvalues(), thr)
                         : std::vector<Cluster>{{0, m, es.eigenvalues()(0)}};
            d1 = static_cast<Index>(copies.size());
            d2 = copies.front().size;
            const bool uniform = std::all_of(copies.begin(), copies.end(), [&](const Cluster& c) { return c.size == d2; });
            if (!uniform || d1 * d2 != m) continue;
            if (copies.size() > 1 && smallest_gap(es.eigenvalues(), copies) < 10.0 * thr) continue;
            copy_vecs = es.eigenvectors();
            break;
        }

        Matrix q(m, m);
        const Matrix e0 = cluster_columns(copy_vecs, copies.front());
        q.leftCols(d2) = e0;
        if (d1 > 1) {
            for (int attempt = 0;; ++attempt) {
                if (attempt == 6) throw NumericalToleranceError("wedderburn_decompose: could not build matrix units", 0.0);
                const Matrix x = v.adjoint() * a.random_element(rng) * v;
                const double xscale = x.norm() / std::sqrt(static_cast<double>(m));
                bool ok = true;
                for (Index c = 1; c < d1 && ok; ++c) {
                    const Matrix ea = cluster_columns(copy_vecs, copies[static_cast<std::size_t>(c)]);
                    // P_a X P_0 = x_{a0} |u_a⟩⟨u_0| ⊗ I carries |u_0,b⟩ to |u_a,b⟩.
                    const Matrix f = ea * (ea.adjoint() * x * e0);
                    const double sa = f.norm() / std::sqrt(static_cast<double>(d2));
                    if (sa < 1e-3 * xscale) {
                        ok = false;
                        break;
                    }
                    q.middleCols(c * d2, d2) = f / sa;
                }
                if (ok) break;
            }
            // Polar factor: nearest exact isometry to the assembled basis.
            Eigen::JacobiSVD<Matrix> svd(q, Eigen::ComputeFullU | Eigen::ComputeFullV);
            q = svd.matrixU() * svd.matrixV().adjoint();
        }
        found.push_back({Sector{v * q, d1, d2, {}}, sc.value});
    }

    std::sort(found.begin(), found.end(), [](const Found& x, const Found& y) {
        return std::tie(x.sector.d1, x.sector.d2, x.central_value) < std::tie(y.sector.d1, y.sector.d2, y.central_value);
    });
    std::vector<Sector> sectors;
    for (Found& f : found) sectors.push_back(std::move(f.sector));
    GeneralizedBipartition bp(n, std::move(sectors), null_iso);

    if (bp.algebra_dimension() != a.size()) {
        std::ostringstream os;
        os << "wedderburn_decompose: Σ d1^2 = " << bp.algebra_dimension() << " but dim A = " << a.size();
        throw NumericalToleranceError(os.str(), static_cast<double>(std::abs(bp.algebra_dimension() - a.size())));
    }
    const double residual = block_form_residual(a, bp);
    if (residual > tol) {
        std::ostringstream os;
        os << "wedderburn_decompose: block-form residual " << residual << " exceeds " << tol;
        throw NumericalToleranceError(os.str(), residual);
    }
    return bp;
}

// ---- variational trace distance ------------------------------------------

namespace {
Matrix projected_difference(const DensityMatrix& rho, const DensityMatrix& sigma, const OperatorAlgebra& a) {
    if (rho.dim() != sigma.dim() || rho.dim() != a.dim()) {
        throw std::invalid_argument("trace_distance_variational: dimension mismatch");
    }
    if (!a.contains_identity()) throw std::invalid_argument("trace_distance_variational: non-unital algebra");
    return hermitian_part(a.project(rho.matrix() - sigma.matrix()));
}
}  // namespace

double trace_distance_variational(const DensityMatrix& rho, const DensityMatrix& sigma, const OperatorAlgebra& a) {
    return 0.5 * trace_norm_hermitian(projected_difference(rho, sigma, a));
}

double trace_distance_variational(const DensityMatrix& rho, const DensityMatrix& sigma, const OperatorAlgebra& a,
                                  const GeneralizedBipartition& bp) {
    const Matrix p = projected_difference(rho, sigma, a);
    if (bp.ambient_dim() != a.dim()) throw std::invalid_argument("trace_distance_variational: decomposition mismatch");
    double norm = 0.0;
    for (const Sector& s : bp.sectors()) {
        // On a sector the projection is P1 ⊗ I2, so ||.||_1 = ||tr_2 block||_1.
        norm += trace_norm_hermitian(partial_trace(Matrix(s.iso.adjoint() * p * s.iso), s.d1, s.d2, Factor::first));
    }
    return 0.5 * norm;
}

}  // namespace ethq
