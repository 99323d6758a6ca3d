#pragma once

#include <string>
#include <vector>

#include "fcl/complexes.hpp"
#include "fcl/generators.hpp"

namespace fcl {

/** Chain map T: source -> target; verticals[j] maps source position j to target position j. */
struct ComplexMorphism {
  FiniteComplex source;
  FiniteComplex target;
  std::vector<Matrix> verticals;

  int length() const { return source.length(); }

  Matrix t(int j) const {
    if (j < 0 || j >= length()) return Matrix::Zero(target.dim(j), source.dim(j));
    return verticals[static_cast<std::size_t>(j)];
  }
};

inline void check_shapes(const ComplexMorphism& m) {
  m.source.check_shapes();
  m.target.check_shapes();
  if (m.source.length() != m.target.length() || static_cast<int>(m.verticals.size()) != m.source.length())
    throw Error("shape", "source, target and verticals must cover the same positions");
  for (int j = 0; j < m.length(); ++j) {
    const Matrix& t = m.verticals[static_cast<std::size_t>(j)];
    if (t.rows() != m.target.dim(j) || t.cols() != m.source.dim(j))
      throw Error("shape", "vertical map " + std::to_string(j) + " has the wrong shape", j);
  }
}

/** Relative commuting-square defects ||T_{j+1}A_j - Q_jT_j||. */
inline std::vector<double> commuting_defects(const ComplexMorphism& m) {
  std::vector<double> out;
  for (int j = 0; j + 1 < m.length(); ++j) {
    Matrix lhs = m.t(j + 1) * m.source.d(j);
    Matrix rhs = m.target.d(j) * m.t(j);
    double scale = 1.0 + opnorm(m.t(j + 1)) * opnorm(m.source.d(j)) + opnorm(m.target.d(j)) * opnorm(m.t(j));
    out.push_back(lhs.size() == 0 ? 0.0 : opnorm(lhs - rhs) / scale);
  }
  return out;
}

inline void require_morphism(const ComplexMorphism& m) {
  check_shapes(m);
  require_complex(m.source, "morphism source");
  require_complex(m.target, "morphism target");
  std::vector<double> d = commuting_defects(m);
  for (std::size_t j = 0; j < d.size(); ++j)
    if (d[j] > kCompositionTol)
      throw Error("non-commuting", "square " + std::to_string(j) + " has defect " + std::to_string(d[j]),
                  static_cast<int>(j));
}

/** Cone on H_j ⊕ L_{j-1} with differential [[-A_j, 0], [T_j, Q_{j-1}]]; one position longer than the inputs. */
inline FiniteComplex mapping_cone(const ComplexMorphism& m) {
  require_morphism(m);
  const int len = m.length() + 1;
  std::vector<Index> dims;
  for (int j = 0; j < len; ++j) dims.push_back(m.source.dim(j) + m.target.dim(j - 1));
  std::vector<Matrix> diffs;
  for (int j = 0; j + 1 < len; ++j) {
    const Index hj = m.source.dim(j), lprev = m.target.dim(j - 1);
    const Index hnext = m.source.dim(j + 1), lj = m.target.dim(j);
    Matrix c = Matrix::Zero(hnext + lj, hj + lprev);
    c.block(0, 0, hnext, hj) = -m.source.d(j);
    c.block(hnext, 0, lj, hj) = m.t(j);
    c.block(hnext, hj, lj, lprev) = m.target.d(j - 1);
    diffs.push_back(std::move(c));
  }
  return FiniteComplex(std::move(dims), std::move(diffs));
}

struct InducedComplex {
  FiniteComplex complex;
  std::vector<Matrix> bases;  // orthonormal columns embedding each space into the ambient one
  bool marginal = false;
};

/** Kernel complex on orthonormal bases of ker T_j. */
inline InducedComplex kernel_complex(const ComplexMorphism& m, double tol = kDefaultTol) {
  require_morphism(m);
  InducedComplex out;
  std::vector<Index> dims;
  for (int j = 0; j < m.length(); ++j) {
    out.marginal = out.marginal || rank_tol(m.t(j), tol).marginal;
    out.bases.push_back(kernel_basis(m.t(j), tol));
    dims.push_back(out.bases.back().cols());
  }
  std::vector<Matrix> diffs;
  for (int j = 0; j + 1 < m.length(); ++j)
    diffs.push_back(out.bases[j + 1].adjoint() * m.source.d(j) * out.bases[j]);
  out.complex = FiniteComplex(std::move(dims), std::move(diffs));
  out.complex.reference_norm = m.source.scale();
  return out;
}

/** Cokernel complex modelled on (im T_j)^⊥ with compressed differentials. */
inline InducedComplex cokernel_complex(const ComplexMorphism& m, double tol = kDefaultTol) {
  require_morphism(m);
  InducedComplex out;
  std::vector<Index> dims;
  for (int j = 0; j < m.length(); ++j) {
    out.marginal = out.marginal || rank_tol(m.t(j), tol).marginal;
    out.bases.push_back(cokernel_basis(m.t(j), tol));
    dims.push_back(out.bases.back().cols());
  }
  std::vector<Matrix> diffs;
  for (int j = 0; j + 1 < m.length(); ++j)
    diffs.push_back(out.bases[j + 1].adjoint() * m.target.d(j) * out.bases[j]);
  out.complex = FiniteComplex(std::move(dims), std::move(diffs));
  out.complex.reference_norm = m.target.scale();
  return out;
}

/** dim Q_j^{-1}(im T_{j+1}) / (ker Q_j + im T_j) for every position j. */
inline std::vector<Index> assumption_dims(const ComplexMorphism& m, double tol = kDefaultTol) {
  require_morphism(m);
  std::vector<Index> out;
  for (int j = 0; j < m.length(); ++j) {
    const Index n = m.target.dim(j);
    Matrix q = m.target.d(j);
    const double qn = opnorm(q), tn = opnorm(m.t(j));
    Matrix off_image = cokernel_basis(m.t(j + 1), tol).adjoint();
    Index preimage = n - rank_tol(off_image * q, tol, qn).rank;
    Index sum = rank_tol(hstack(kernel_basis(q, tol) * std::max(1.0, tn), m.t(j)), tol).rank;
    out.push_back(preimage - sum);
  }
  return out;
}

struct ConeDecompositionReport {
  std::vector<Index> cone_dims, ker_dims, coker_dims, assumption_dims;
  long cone_index = 0, ker_index = 0, coker_index = 0;
  bool decomposition_holds = false;
  bool hypothesis_holds = false;
  bool marginal = false;
};

/**
 * Computes cone, kernel and cokernel cohomology. When every assumption quotient is
 * trivial, checks cone[j] = ker[j] + coker[j-1] and the index identity exactly; otherwise
 * decomposition_holds stays false.
 */
inline ConeDecompositionReport verify_cone_decomposition(const ComplexMorphism& m, double tol = kDefaultTol) {
  ConeDecompositionReport r;
  CohomologyReport cone = cohomology(mapping_cone(m), tol);
  InducedComplex ker = kernel_complex(m, tol);
  InducedComplex coker = cokernel_complex(m, tol);
  CohomologyReport kc = cohomology(ker.complex, tol);
  CohomologyReport cc = cohomology(coker.complex, tol);
  r.cone_dims = cone.dims;
  r.ker_dims = kc.dims;
  r.coker_dims = cc.dims;
  r.assumption_dims = assumption_dims(m, tol);
  r.cone_index = cone.index;
  r.ker_index = kc.index;
  r.coker_index = cc.index;
  r.marginal = cone.marginal || kc.marginal || cc.marginal || ker.marginal || coker.marginal;
  r.hypothesis_holds = std::all_of(r.assumption_dims.begin(), r.assumption_dims.end(), [](Index d) { return d == 0; });
  if (r.hypothesis_holds) {
    bool ok = r.cone_index == r.ker_index - r.coker_index;
    for (int j = 0; j < static_cast<int>(r.cone_dims.size()); ++j) {
      Index k = j < static_cast<int>(r.ker_dims.size()) ? r.ker_dims[j] : 0;
      Index c = j >= 1 && j - 1 < static_cast<int>(r.coker_dims.size()) ? r.coker_dims[j - 1] : 0;
      ok = ok && r.cone_dims[j] == k + c;
    }
    r.decomposition_holds = ok;
  }
  return r;
}

/** Source 0 -> H --(-1)--> H, target L --(1)--> L -> 0, verticals (0, T1, 0); H = L = C^m. */
inline ComplexMorphism counterexample_instance(const Matrix& t1) {
  if (t1.rows() != t1.cols()) throw Error("shape", "T1 must be square");
  const Index m = t1.rows();
  ComplexMorphism out;
  out.source = FiniteComplex({0, m, m}, {Matrix::Zero(m, 0), -Matrix::Identity(m, m)});
  out.target = FiniteComplex({m, m, 0}, {Matrix::Identity(m, m), Matrix::Zero(0, m)});
  out.verticals = {Matrix::Zero(m, 0), t1, Matrix::Zero(0, m)};
  return out;
}

inline ComplexMorphism identity_morphism(const FiniteComplex& c) {
  ComplexMorphism out{c, c, {}};
  for (int j = 0; j < c.length(); ++j) out.verticals.push_back(Matrix::Identity(c.dim(j), c.dim(j)));
  return out;
}

inline ComplexMorphism zero_morphism(const FiniteComplex& s, const FiniteComplex& t) {
  ComplexMorphism out{s, t, {}};
  for (int j = 0; j < s.length(); ++j) out.verticals.push_back(Matrix::Zero(t.dim(j), s.dim(j)));
  return out;
}

/**
 * Morphism with surjective verticals: the source is an extension of the target
 * by a random complex K (H_j = L_j ⊕ K_j with a homotopy-type coupling), T_j is the
 * projection onto L_j, and a random unitary basis change hides the splitting.
 */
inline ComplexMorphism random_surjective_morphism(Rng& rng, int spaces, Index max_dim) {
  Index target_max = std::max<Index>(1, max_dim / 2);
  FiniteComplex target = complex_from_blueprint(rng, random_blueprint(rng, spaces, target_max));
  FiniteComplex kpart = complex_from_blueprint(rng, random_blueprint(rng, spaces, max_dim - target_max));
  std::vector<Matrix> z;
  for (int j = 0; j < spaces; ++j) z.push_back(rng.gaussian(kpart.dim(j), target.dim(j)) * 0.5);
  std::vector<Index> dims;
  std::vector<Matrix> basis;
  for (int j = 0; j < spaces; ++j) {
    dims.push_back(target.dim(j) + kpart.dim(j));
    basis.push_back(rng.unitary(dims.back()));
  }
  std::vector<Matrix> diffs;
  for (int j = 0; j + 1 < spaces; ++j) {
    const Index l0 = target.dim(j), l1 = target.dim(j + 1), k0 = kpart.dim(j), k1 = kpart.dim(j + 1);
    Matrix a = Matrix::Zero(l1 + k1, l0 + k0);
    a.block(0, 0, l1, l0) = target.d(j);
    a.block(l1, 0, k1, l0) = z[j + 1] * target.d(j) - kpart.d(j) * z[j];
    a.block(l1, l0, k1, k0) = kpart.d(j);
    diffs.push_back(basis[j + 1] * a * basis[j].adjoint());
  }
  ComplexMorphism out;
  out.source = FiniteComplex(dims, std::move(diffs));
  out.target = target;
  for (int j = 0; j < spaces; ++j) {
    Matrix proj = Matrix::Zero(target.dim(j), dims[j]);
    proj.leftCols(target.dim(j)) = Matrix::Identity(target.dim(j), target.dim(j));
    out.verticals.push_back(proj * basis[j].adjoint());
  }
  return out;
}

}  // namespace fcl
