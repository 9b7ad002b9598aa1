#pragma once

// Outer time loop. Each step solves psi^n from (psi^{n-1}, phi^{n-1}) node by
// node, then phi^n from (phi^{n-1}, psi^{n-1}), advances the envelope ledger
// and checks positivity, envelopes and energy budgets at the configured
// cadence. Diagnostics stream to CSV; snapshots are written asynchronously.

#include <cmath>
#include <filesystem>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "rodflow/config.hpp"
#include "rodflow/diagnostics.hpp"
#include "rodflow/error.hpp"
#include "rodflow/fields.hpp"
#include "rodflow/flow.hpp"
#include "rodflow/fragmentation.hpp"
#include "rodflow/io.hpp"
#include "rodflow/monomer_step.hpp"
#include "rodflow/polymer_step.hpp"
#include "rodflow/stability.hpp"

namespace rodflow {

struct SimulationState {
  long step = 0;
  double t = 0.0;
  PolymerField psi;
  MonomerField phi;
};

/// Worst values of the checked properties over all checked steps.
struct InvariantSummary {
  double negative_ratio = 0.0;        // |[psi]_-| / |psi| in L2_alpha
  double envelope_excess = 0.0;       // max of psi - C_n e^{-alpha r}, clipped at 0 from below
  double phi_below = 0.0;             // max of -phi
  double phi_above = 0.0;             // max of phi - |phi0|_inf
  double psi_energy_ratio = 0.0;      // lhs / bound
  double phi_energy_ratio = 0.0;
  double coercivity_margin = 0.0;     // witness / threshold - 1, at step 1
  double flow_round_trip = 0.0;
  double flow_det = 0.0;
  int max_krylov_iterations = 0;
  long checked_steps = 0;
};

class Simulation {
 public:
  explicit Simulation(RunConfig cfg) : cfg_(std::move(cfg)) { setup(); }

  const RunConfig& config() const { return cfg_; }
  const Discretization& discretization() const { return disc_; }
  const ModelParams& params() const { return params_; }
  const StabilityLedger& ledger() const { return ledger_; }
  const SimulationState& state() const { return state_; }
  const InvariantSummary& summary() const { return summary_; }
  const VelocityField& velocity() const { return velocity_; }
  const FlowBounds& flow_bounds() const { return bounds_; }
  double epsilon() const { return eps_; }
  double psi0_norm_sq() const { return psi0_norm_sq_; }
  double phi0_norm_sq() const { return phi0_norm_sq_; }
  const EnergyTracker& energy() const { return energy_; }

  DiagnosticsRecord diagnostics() const {
    auto rec = compute_diagnostics(state_.step, state_.t, state_.psi, state_.phi, disc_, ledger_.cn);
    rec.psi_energy_lhs = energy_.psi_lhs();
    rec.psi_energy_bound = ledger_.psi_energy_bound(psi0_norm_sq_);
    rec.phi_energy_lhs = energy_.phi_lhs();
    rec.phi_energy_bound = StabilityLedger::phi_energy_bound(phi0_norm_sq_);
    return rec;
  }

  /// One step of the scheme.
  void step() {
    const long n = state_.step + 1;
    const double t_now = static_cast<double>(n) * cfg_.dt;
    const double dt = cfg_.dt;
    const auto& d = disc_;

    const PolymerField pulled = pullback(state_.psi, stencil_);

    PolymerField next(d);
    for (std::size_t y = 0; y < d.n_y(); ++y) {
      const std::span<const double> g_eta(g_field_.data() + y * d.n_eta(), d.n_eta());
      PolymerNodeInputs in{grad_u_[y], g_eta, state_.phi.values[y]};
      const auto op = assemble_polymer_operator(params_, d, in, dt, eps_);
      if (n == 1) check_coercivity(op, y);
      const auto rhs = polymer_rhs(pulled.block(y), state_.psi.block(y), g_eta, d, params_.kernel, dt);
      PolymerSolveReport rep;
      const auto sol = solve_polymer_step(op, rhs, d.n_r(), cfg_.solver, &rep);
      summary_.max_krylov_iterations = std::max(summary_.max_krylov_iterations, rep.iterations);
      std::copy(sol.begin(), sol.end(), next.block(y).begin());
    }

    // Monomer sink from the previous polymer state, with the solver's eta measure.
    std::vector<double> sink = total_integral(state_.psi, d, d.sphere.cell_areas);
    for (double& s : sink) s *= params_.tau0;
    const auto mop = assemble_monomer_operator(params_.d2, d.space, faces_, sink, dt);
    MonomerField phi_next = solve_monomer_step(mop, state_.phi);

    energy_.update(params_, d, dt, next, pulled, phi_next, state_.phi, faces_);
    ledger_.advance();
    state_.psi = std::move(next);
    state_.phi = std::move(phi_next);
    state_.step = n;
    state_.t = t_now;

    if (n % cfg_.output.check_every == 0 || n == cfg_.n_steps) check_invariants();
  }

  /// Runs all remaining steps. With `write_outputs`, streams diagnostics and
  /// snapshots into the configured directory.
  void run(bool write_outputs, const std::function<void(const DiagnosticsRecord&)>& observer = {}) {
    std::optional<CsvWriter> csv;
    std::filesystem::path dir = cfg_.output.directory;
    if (write_outputs) {
      std::filesystem::create_directories(dir);
      csv.emplace(dir / "diagnostics.csv", cfg_.hash);
    }
    auto emit = [&] {
      const auto rec = diagnostics();
      if (csv) csv->write(rec);
      if (observer) observer(rec);
    };
    emit();
    while (state_.step < cfg_.n_steps) {
      step();
      const long n = state_.step;
      if (n % cfg_.output.diagnostics_every == 0 || n == cfg_.n_steps) emit();
      const bool snap = (cfg_.output.snapshot_every > 0 && n % cfg_.output.snapshot_every == 0) ||
                        n == cfg_.n_steps;
      if (write_outputs && snap) write_snapshot_async(dir);
    }
    if (pending_.valid()) pending_.get();
  }

  ~Simulation() {
    if (pending_.valid()) pending_.wait();
  }

 private:
  void setup() {
    params_ = cfg_.model;
    disc_ = make_discretization(cfg_);
    params_.validate_on_nodes(disc_.length.r);
    velocity_ = builtin_field(cfg_.flow, disc_.space);
    require(boundary_normal_flux(velocity_, disc_.space) <= 1e-10, ErrorKind::UnsupportedDomainPairing,
            "velocity is not tangential on the domain boundary");

    bounds_ = measure_flow_bounds(params_, disc_, velocity_);
    if (params_.g_rate.kind != ScissionRate::Kind::Constant && !params_.g_rate.g_hi)
      params_.g_rate.g_hi = std::max(bounds_.g_max, params_.g_lo());
    require(bounds_.g_min >= params_.g_lo() * (1.0 - 1e-14) &&
                bounds_.g_max <= params_.g_hi() * (1.0 + 1e-14),
            ErrorKind::BoundViolation, "g leaves [g_lo, g_hi] on the flow envelope");

    state_.psi = initial_psi(cfg_, disc_);
    state_.phi = initial_phi(cfg_, disc_);
    for (double v : state_.phi.values)
      require(v >= 0.0 && std::isfinite(v), ErrorKind::NegativeMonomerInput,
              "initial monomer field must be nonnegative");
    const double c0 = cfg_.c0 ? *cfg_.c0 : envelope_constant(state_.psi, disc_);
    const auto env = check_initial_envelope(state_.psi, disc_, c0);
    if (!env.pass)
      throw Error(ErrorKind::BoundViolation,
                  "initial psi exceeds C0 e^{-alpha r} by " + std::to_string(env.max_violation));

    phi0_inf_ = state_.phi.sup_norm();
    ledger_ = make_ledger(params_, bounds_, disc_.space.volume, phi0_inf_, c0, cfg_.dt, cfg_.n_steps);
    ledger_.precheck();

    eps_ = cfg_.epsilon ? *cfg_.epsilon : disc_.length.dr * disc_.length.dr;

    // The built-in fields are steady, so the characteristics, face fluxes and
    // g are the same at every step.
    const auto map = compute_flow_map(velocity_, 0.0, cfg_.dt, disc_.space.centers,
                                      disc_.space.min_spacing(), 1);
    summary_.flow_round_trip = map.max_round_trip;
    summary_.flow_det = map.max_det_deviation;
    stencil_ = make_pullback_stencil(map, disc_.space);
    faces_ = cell_faces(disc_.space, velocity_);
    grad_u_.resize(disc_.n_y());
    g_field_.resize(disc_.column_count());
    for (std::size_t y = 0; y < disc_.n_y(); ++y) {
      const Vec3& pos = disc_.space.centers[y];
      grad_u_[y] = velocity_.gradient(cfg_.dt, pos);
      const Vec3 u = velocity_.velocity(cfg_.dt, pos);
      for (std::size_t i = 0; i < disc_.n_eta(); ++i)
        g_field_[y * disc_.n_eta() + i] = evaluate_g(params_, grad_u_[y], u, disc_.sphere.nodes[i]);
    }

    psi0_norm_sq_ = weighted_norm_sq(state_.psi, disc_, NormKind::L2alpha);
    phi0_norm_sq_ = monomer_norm_sq(disc_.space, state_.phi.values);
    energy_.start(state_.psi, state_.phi, disc_);
  }

  void check_coercivity(const StepOperator& op, std::size_t y) {
    const double threshold = 1.0 / cfg_.dt - 0.5 * ledger_.k3;
    const double witness = coercivity_witness(op);
    const double margin = witness / threshold - 1.0;
    if (y == 0 || margin < summary_.coercivity_margin) summary_.coercivity_margin = margin;
    if (witness < threshold * (1.0 - 1e-6)) breach("coercivity", witness - threshold);
  }

  void breach(const std::string& name, double magnitude) {
    if (cfg_.output.strict) throw InvariantBreachError(name, state_.step, magnitude);
  }

  void check_invariants() {
    const auto& d = disc_;
    ++summary_.checked_steps;
    PolymerField neg = state_.psi;
    double excess = -std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < d.n_y(); ++y)
      for (std::size_t i = 0; i < d.n_eta(); ++i) {
        auto col = neg.column(y, i);
        for (std::size_t j = 0; j < col.size(); ++j) {
          excess = std::max(excess, col[j] - ledger_.cn * std::exp(-d.length.alpha * d.length.r[j]));
          col[j] = std::min(col[j], 0.0);
        }
      }
    const double norm = std::sqrt(weighted_norm_sq(state_.psi, d, NormKind::L2alpha));
    const double neg_norm = std::sqrt(weighted_norm_sq(neg, d, NormKind::L2alpha));
    const double ratio = norm > 0.0 ? neg_norm / norm : neg_norm;
    summary_.negative_ratio = std::max(summary_.negative_ratio, ratio);
    if (ratio > 1e-10) breach("psi positivity", ratio);

    summary_.envelope_excess = std::max(summary_.envelope_excess, excess);
    if (excess > 1e-8) breach("psi envelope", excess);

    const double lo = -field_min(state_.phi.values);
    const double hi = field_max(state_.phi.values) - phi0_inf_;
    summary_.phi_below = std::max(summary_.phi_below, lo);
    summary_.phi_above = std::max(summary_.phi_above, hi);
    if (lo > 1e-12) breach("phi nonnegativity", lo);
    if (hi > 1e-12) breach("phi maximum principle", hi);

    const double pb = ledger_.psi_energy_bound(psi0_norm_sq_);
    const double fb = StabilityLedger::phi_energy_bound(phi0_norm_sq_);
    const double pr = pb > 0.0 ? energy_.psi_lhs() / pb : 0.0;
    const double fr = fb > 0.0 ? energy_.phi_lhs() / fb : 0.0;
    summary_.psi_energy_ratio = std::max(summary_.psi_energy_ratio, pr);
    summary_.phi_energy_ratio = std::max(summary_.phi_energy_ratio, fr);
    if (pr > 1.0) breach("psi energy budget", energy_.psi_lhs() - pb);
    if (fr > 1.0) breach("phi energy budget", energy_.phi_lhs() - fb);
  }

  void write_snapshot_async(const std::filesystem::path& dir) {
    if (pending_.valid()) pending_.get();
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%06ld.bin", state_.step);
    auto snap = make_snapshot(cfg_.hash, state_.step, state_.t, state_.psi, state_.phi, disc_);
    const auto path = dir / name;
    pending_ = std::async(std::launch::async,
                          [path, s = std::move(snap)] { write_snapshot(path, s); });
  }

  RunConfig cfg_;
  ModelParams params_;
  Discretization disc_;
  VelocityField velocity_;
  FlowBounds bounds_;
  StabilityLedger ledger_;
  SimulationState state_;
  InvariantSummary summary_;
  EnergyTracker energy_;
  PullbackStencil stencil_;
  std::vector<CellFace> faces_;
  std::vector<Mat3> grad_u_;
  std::vector<double> g_field_;
  double eps_ = 0.0;
  double phi0_inf_ = 0.0;
  double psi0_norm_sq_ = 0.0;
  double phi0_norm_sq_ = 0.0;
  std::future<void> pending_;
};

}  // namespace rodflow
