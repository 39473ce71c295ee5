#pragma once

// Lyapunov quantities of the relaxed system evaluated with the same discrete
// operators the stepper uses, so that the discrete energy identity
//   dE/dt = -sum_faces h B_face ((g_{i+1} - g_i)/h)^2,   g = phi + psi_+'(n)
// holds exactly for the semi-discrete scheme.

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "rdch/model.hpp"
#include "rdch/state.hpp"

namespace rdch {

struct DiagnosticsRecord {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  double entropy = 0.0;
  double flux_l2 = 0.0;
  double n_min = 0.0;
  double n_max = 0.0;
  int fp_iterations = 0;
  double dt = 0.0;
};

inline constexpr std::string_view kDiagnosticsHeader =
    "t,mass,energy,dissipation,entropy,flux_l2,n_min,n_max,fp_iterations,dt";

double energy(const Field& n, const Field& phi, const Model& model);
inline double energy(const State& s, const Model& model) { return energy(s.n, s.phi, model); }

/// E[to] - E[from] accumulated cell by cell from the exact sample increments,
/// so it stays accurate when the two states differ by O(1e-12).
double energy_difference(const State& from, const State& to, const Model& model);

/// E[n + dn, phi_to] - E[from] with the density increment dn supplied exactly
/// rather than recovered from a rounded n + dn.
double energy_increment(const State& from, const Field& dn, const Field& phi_to,
                        const Model& model);

double dissipation(const State& s, const Model& model);

/// Integral of phi_eps(n) for a regularized model, of the singular density
/// otherwise (+inf when a sample sits outside (0,1)).
double entropy(const Field& n, const Model& model);

/// Signed contributions to -dPhi/dt:
///   gamma |Lap(n - sigma/gamma phi)|^2 + sigma/gamma |grad phi|^2
///   + psi_-''(w) |grad w|^2 + psi_+''(n) |grad n|^2.
struct EntropyTerms {
  double laplacian_term = 0.0;
  double grad_phi_term = 0.0;
  double psi_minus_term = 0.0;
  double psi_plus_term = 0.0;

  double total() const noexcept {
    return laplacian_term + grad_phi_term + psi_minus_term + psi_plus_term;
  }
  /// The three terms that are non-negative by construction.
  double positive() const noexcept { return laplacian_term + grad_phi_term + psi_plus_term; }
};

EntropyTerms entropy_dissipation_terms(const State& s, const Model& model);

/// L2 norm of the interior face flux -B_face dg/dx.
double flux_l2(const State& s, const Model& model);

DiagnosticsRecord make_record(const State& s, const Model& model, int fp_iterations);

/// Tracks  Phi[n(T)] + int_0^T (positive entropy terms)  against
///   Phi[n0] + (2T/gamma) sup|psi_-''| E[n0].
class EntropyBoundTracker {
 public:
  EntropyBoundTracker(const State& initial, const Model& model);

  /// Accumulate the positive terms of the state at the start of a step of length dt.
  void accumulate(const State& step_start, double dt);

  double lhs(const State& current) const;
  double rhs(double elapsed) const;

 private:
  const Model* model_;
  double phi0_;
  double energy0_;
  double integral_ = 0.0;
};

std::string format_record(const DiagnosticsRecord& r);

/// Appends records to a CSV file; writes the header only when creating it.
class CsvSink {
 public:
  CsvSink(const std::filesystem::path& path, bool append);
  void write(const DiagnosticsRecord& r);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

}  // namespace rdch
