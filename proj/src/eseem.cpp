#include "nvespin/eseem.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>

#include "nvespin/spin_ops.hpp"

namespace nvespin::eseem {

namespace {

// Lab-frame electron basis: eigenvectors of b.S with eigenvalues -1, 0, +1,
// phase-fixed so the assignment is reproducible.
ComplexMatrix lab_electron_basis(const Vector3& b) {
  const SpinMatrices s = spin_matrices(SpinQuantum(3));
  const ComplexMatrix sb = b[0] * s.sx + b[1] * s.sy + b[2] * s.sz;
  return eigensolve(sb).eigenvectors;  // columns ordered m = -1, 0, +1
}

struct ManifoldStates {
  RealVector lambda;    // exact eigenvalues, ascending
  ComplexMatrix states;  // orthonormalized nuclear states, columns
};

// Orthonormalize nearly-unitary columns via SVD (U V^dagger).
ComplexMatrix loewdin(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

ManifoldPairData manifold_pair_data(const SpinSystem& sys, const FieldVector& field,
                                    const TransitionSelection& sel, int cap) {
  const int nd = sys.nuclear_dimension();
  const auto h = build_hamiltonian(sys, field, cap);
  const auto eig = eigensolve(h);
  const ComplexMatrix chi = lab_electron_basis(field.direction);

  // Assign each full eigenvector to its dominant lab m_S manifold.
  struct Entry {
    double lambda;
    Eigen::VectorXcd nuc;
  };
  std::array<std::vector<Entry>, 3> groups;  // index m+1
  for (int i = 0; i < h.dimension; ++i) {
    Eigen::Map<const ComplexMatrix> vi(eig.eigenvectors.col(i).data(), nd, 3);
    // vi: column e holds the nuclear block of electron basis state e
    // (product basis is electron-major, so reshape column-wise with nd rows).
    int best = -1;
    double bw = -1.0;
    Eigen::VectorXcd bproj;
    for (int m = 0; m < 3; ++m) {
      Eigen::VectorXcd proj = Eigen::VectorXcd::Zero(nd);
      for (int e = 0; e < 3; ++e) proj += std::conj(chi(e, m)) * vi.col(e);
      const double w = proj.squaredNorm();
      if (w > bw) {
        bw = w;
        best = m;
        bproj = std::move(proj);
      }
    }
    if (bw < kManifoldWeightThreshold)
      throw AmbiguousManifoldError("manifold weight " + std::to_string(bw) + " below " +
                                   std::to_string(kManifoldWeightThreshold) + " at B = " +
                                   std::to_string(field.magnitude_mt) + " mT");
    groups[best].push_back({eig.eigenvalues[i], std::move(bproj)});
  }
  for (int m = 0; m < 3; ++m)
    if (static_cast<int>(groups[m].size()) != nd)
      throw AmbiguousManifoldError("manifold m_S=" + std::to_string(m - 1) + " holds " +
                                   std::to_string(groups[m].size()) + " states, expected " +
                                   std::to_string(nd));

  auto make = [&](int label) {
    const auto& g = groups[label + 1];
    ManifoldStates ms;
    ms.lambda.resize(nd);
    ComplexMatrix raw(nd, nd);
    for (int k = 0; k < nd; ++k) {  // global eigenvalue sort keeps these ascending
      ms.lambda[k] = g[k].lambda;
      raw.col(k) = g[k].nuc;
    }
    ms.states = loewdin(raw);
    return ms;
  };

  const auto labels = manifold_labels(sel.pair);
  const ManifoldStates a = make(labels[0]);
  const ManifoldStates b = make(labels[1]);

  ManifoldPairData out;
  out.lambda_a = a.lambda;
  out.lambda_b = b.lambda;
  out.states_a = a.states;
  out.states_b = b.states;
  out.overlap = a.states.adjoint() * b.states;
  out.label_a = labels[0];
  out.label_b = labels[1];
  return out;
}

SubHamiltonians sub_hamiltonians(const SpinSystem& sys, const FieldVector& field,
                                 const TransitionSelection& sel) {
  const auto d = manifold_pair_data(sys, field, sel);
  SubHamiltonians out;
  out.h_a = d.states_a * d.lambda_a.asDiagonal() * d.states_a.adjoint();
  out.h_b = d.states_b * d.lambda_b.asDiagonal() * d.states_b.adjoint();
  return out;
}

RealVector make_tau_grid(double step_us, int points, double start_us) {
  RealVector tau(points);
  for (int k = 0; k < points; ++k) tau[k] = start_us + k * step_us;
  return tau;
}

namespace {

void check_uniform(const RealVector& tau) {
  if (tau.size() < 2) return;
  const double dt = tau[1] - tau[0];
  if (dt <= 0) throw std::invalid_argument("tau grid must be strictly increasing");
  for (Eigen::Index k = 1; k + 1 < tau.size(); ++k)
    if (std::abs(tau[k + 1] - tau[k] - dt) > 1e-12 * std::max(1.0, std::abs(dt)))
      throw std::invalid_argument("tau grid must be uniform");
}

RealVector mims_trace(const ManifoldPairData& d, const RealVector& tau_us) {
  const int n = static_cast<int>(d.lambda_a.size());
  const ComplexMatrix& m = d.overlap;
  const ComplexMatrix mh = m.adjoint();
  RealVector v(tau_us.size());
  Eigen::VectorXcd da(n), db(n);
  for (Eigen::Index k = 0; k < tau_us.size(); ++k) {
    const double t = tau_us[k];
    for (int q = 0; q < n; ++q) {
      da[q] = std::polar(1.0, -2.0 * M_PI * d.lambda_a[q] * t);
      db[q] = std::polar(1.0, -2.0 * M_PI * d.lambda_b[q] * t);
    }
    const ComplexMatrix t1 = m * da.asDiagonal() * mh * db.asDiagonal();
    const ComplexMatrix t2 = m * da.conjugate().asDiagonal() * mh * db.conjugate().asDiagonal();
    v[k] = (t1 * t2).trace().real() / n;
  }
  return v;
}

}  // namespace

EseemTrace eseem_time_domain(const SpinSystem& sys, const FieldVector& field,
                             const TransitionSelection& sel, const RealVector& tau_us) {
  check_uniform(tau_us);
  const auto d = manifold_pair_data(sys, field, sel);
  EseemTrace trace;
  trace.tau_us = tau_us;
  trace.v = mims_trace(d, tau_us);
  trace.field_mt = field.magnitude_mt;
  trace.direction = field.direction;
  trace.selection = sel;
  return trace;
}

NuclearFrequencies nuclear_frequencies(const SpinSystem& sys, const FieldVector& field,
                                       const TransitionSelection& sel) {
  const auto d = manifold_pair_data(sys, field, sel);
  auto diffs = [](const RealVector& lam) {
    std::vector<double> out;
    for (int i = 0; i < lam.size(); ++i)
      for (int j = i + 1; j < lam.size(); ++j) out.push_back(std::abs(lam[j] - lam[i]));
    std::sort(out.begin(), out.end());
    return out;
  };
  NuclearFrequencies nf;
  nf.label_a = d.label_a;
  nf.label_b = d.label_b;
  nf.freqs_a = diffs(d.lambda_a);
  nf.freqs_b = diffs(d.lambda_b);
  return nf;
}

EseemTrace multi_nucleus_trace(const SpinSystem& sys, const FieldVector& field,
                               const TransitionSelection& sel, const RealVector& tau_us,
                               CombineMode mode) {
  if (mode == CombineMode::joint) return eseem_time_domain(sys, field, sel, tau_us);

  EseemTrace trace;
  trace.tau_us = tau_us;
  trace.v = RealVector::Ones(tau_us.size());
  trace.field_mt = field.magnitude_mt;
  trace.direction = field.direction;
  trace.selection = sel;
  for (size_t k = 0; k < sys.nuclei.size(); ++k) {
    SpinSystem single = sys;
    single.nuclei = {sys.nuclei[k]};
    const auto t = eseem_time_domain(single, field, sel, tau_us);
    trace.v = trace.v.cwiseProduct(t.v);
  }
  return trace;
}

ModulationDepthReport modulation_depth(const EseemTrace& trace) {
  ModulationDepthReport rep;
  const double vmax = trace.v.maxCoeff();
  const double vmin = trace.v.minCoeff();
  if (vmax <= 0.0) {
    rep.raw = 1.0;
    rep.depth = 1.0;
    return rep;
  }
  rep.raw = (vmax - vmin) / vmax;
  rep.depth = std::clamp(rep.raw, 0.0, 1.0);
  return rep;
}

ScanResult cancellation_scan(const SpinSystem& sys, const Vector3& direction,
                             const TransitionSelection& sel,
                             std::array<double, 2> field_range_mt, int n_points,
                             const RealVector& tau_us) {
  if (n_points < 2) throw std::invalid_argument("cancellation_scan: need >= 2 points");
  ScanResult res;
  res.points.reserve(n_points);
  const Vector3 dir = direction.normalized();
  const double db = (field_range_mt[1] - field_range_mt[0]) / (n_points - 1);
  double best_raw = -1.0;
  for (int k = 0; k < n_points; ++k) {
    ScanPoint p;
    p.field_mt = field_range_mt[0] + k * db;
    try {
      const auto t = eseem_time_domain(sys, FieldVector(p.field_mt, dir), sel, tau_us);
      const auto d = modulation_depth(t);
      p.depth = d.depth;
      p.raw = d.raw;
      if (d.raw > best_raw) {
        best_raw = d.raw;
        res.argmax_field_mt = p.field_mt;
        res.max_depth = d.depth;
      }
    } catch (const AmbiguousManifoldError&) {
      // Strong electron-state mixing at this field; excluded from the argmax.
      p.depth = std::numeric_limits<double>::quiet_NaN();
      p.raw = std::numeric_limits<double>::quiet_NaN();
      ++res.skipped;
    }
    res.points.push_back(p);
  }
  return res;
}

EseemTrace damped_ensemble_trace(const SpinSystem& sys, const FieldVector& field,
                                 const TransitionSelection& sel, const RealVector& tau_us,
                                 double delta_a_frac, double delta_q_frac, int n_samples,
                                 std::uint64_t seed) {
  if (delta_a_frac < 0 || delta_q_frac < 0)
    throw std::invalid_argument("damped_ensemble_trace: fractions must be >= 0");
  if (n_samples < 1) throw std::invalid_argument("damped_ensemble_trace: n_samples >= 1");

  if (delta_a_frac == 0.0 && delta_q_frac == 0.0)
    return eseem_time_domain(sys, field, sel, tau_us);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  EseemTrace acc;
  acc.tau_us = tau_us;
  acc.v = RealVector::Zero(tau_us.size());
  acc.field_mt = field.magnitude_mt;
  acc.direction = field.direction;
  acc.selection = sel;
  for (int s = 0; s < n_samples; ++s) {
    SpinSystem draw = sys;
    for (auto& nuc : draw.nuclei) {
      nuc.hyperfine.parallel_mhz *= 1.0 + delta_a_frac * gauss(rng);
      nuc.hyperfine.perpendicular_mhz *= 1.0 + delta_a_frac * gauss(rng);
      if (nuc.quadrupole) {
        const double p = nuc.quadrupole->parallel_mhz * (1.0 + delta_q_frac * gauss(rng));
        *nuc.quadrupole = AxialTensor::quadrupole_from_p(p, nuc.quadrupole->axis);
      }
    }
    acc.v += eseem_time_domain(draw, field, sel, tau_us).v;
  }
  acc.v /= n_samples;
  return acc;
}

}  // namespace nvespin::eseem
