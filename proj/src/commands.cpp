#include "nlres/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>

#include "nlres/errors.hpp"
#include "nlres/ode.hpp"

namespace nlres {

namespace {

const std::vector<std::string> kTimingKeys{"transient_periods", "sample_periods", "n_max",
                                           "qp_samples", "early_settle"};
const std::vector<std::string> kSeedKeys{"seed", "state", "n"};

std::vector<std::string> keys(std::vector<std::string> own, bool seeded) {
  own.insert(own.end(), kTimingKeys.begin(), kTimingKeys.end());
  if (seeded) own.insert(own.end(), kSeedKeys.begin(), kSeedKeys.end());
  return own;
}

SweepTiming timing_from(const Config& c, const std::string& sec, SweepTiming t) {
  t.transient_periods = c.integer(sec, "transient_periods", t.transient_periods);
  t.sample_periods = c.integer(sec, "sample_periods", t.sample_periods);
  t.n_max = c.integer(sec, "n_max", t.n_max);
  t.qp_samples = c.integer(sec, "qp_samples", t.qp_samples);
  t.early_settle = c.flag(sec, "early_settle", t.early_settle);
  try {
    t.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError("[" + sec + "]: " + e.what());
  }
  return t;
}

Range range(const Config& c, const std::string& sec, const std::string& key,
            std::optional<Range> fallback = std::nullopt) {
  if (!c.has(sec, key)) {
    if (fallback) return *fallback;
    throw ConfigError("[" + sec + "] " + key + ": required");
  }
  const auto v = c.numbers(sec, key, {}, 2);
  if (!(v[0] < v[1])) throw ConfigError("[" + sec + "] " + key + ": empty range");
  return {v[0], v[1]};
}

Axis axis(const Config& c, const std::string& sec, const std::string& key) {
  if (!c.has(sec, key)) throw ConfigError("[" + sec + "] " + key + ": required");
  const auto v = c.numbers(sec, key, {}, 3);
  const int count = static_cast<int>(v[2]);
  if (count < 1 || count != v[2])
    throw ConfigError("[" + sec + "] " + key + ": count must be a positive integer");
  if (v[1] < v[0] || (count > 1 && v[1] == v[0]))
    throw ConfigError("[" + sec + "] " + key + ": empty range");
  return {v[0], v[1], count};
}

Param param_key(const Config& c, const std::string& sec, const std::string& key, Param fallback) {
  if (!c.has(sec, key)) return fallback;
  try {
    return parse_param(*c.get(sec, key));
  } catch (const InvalidArgument& e) {
    throw ConfigError("[" + sec + "] " + key + ": " + e.what());
  }
}

void prepare_out(const std::filesystem::path& out) {
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec || !std::filesystem::is_directory(out))
    throw IoError("cannot create output directory '" + out.string() + "'");
}

template <class Writer, class Value>
void emit(CommandResult& r, const std::filesystem::path& p, Writer w, const Value& v) {
  std::ostringstream ss;
  w(ss, v);
  save_text(p, ss.str());
  r.files.push_back(p);
}

void emit_text(CommandResult& r, const std::filesystem::path& p, const std::string& text) {
  save_text(p, text);
  r.files.push_back(p);
}

void record(CommandResult& r, std::string item, const NumericalError& e) {
  r.errors.push_back({std::move(item), e.code(), e.what()});
}

// Runs fn(i) for i < count on up to `threads` workers (0 = hardware
// concurrency). Results must go into per-index slots.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(threads, count));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  std::vector<std::jthread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(work);
  work();
}

PeriodicOrbit seed_orbit(const Config& c, const std::string& sec, const ModelParams& p,
                         const Numerics& num, const SweepTiming& timing) {
  const std::string mode = c.text(sec, "seed", "integrate");
  const auto s = c.numbers(sec, "state", {0.0, 0.0}, 2);
  const OscState state{s[0], s[1]};
  int n = c.integer(sec, "n", 0);
  if (n < 0) throw ConfigError("[" + sec + "] n: must be positive");
  OscState guess = state;
  if (mode == "integrate") {
    const CellResult cell = classify_attractor(p, state, timing);
    if (cell.cls != AttractorClass::Periodic)
      throw SeedNotConverged("attractor reached from the seed state is " +
                             std::string(to_string(cell.cls)) +
                             (cell.diagnostic.empty() ? "" : " (" + cell.diagnostic + ")"));
    if (n && cell.n != n)
      throw SeedNotConverged("attractor has period " + std::to_string(cell.n) +
                             ", requested " + std::to_string(n));
    n = cell.n;
    guess = cell.strobe;
  } else if (mode == "primary") {
    // Small-forcing response near rest, carried up to the configured A.
    if (n > 1) throw ConfigError("[" + sec + "] n: the primary branch has n = 1");
    const double a0 = std::min(p.A, 0.05);
    const PeriodicOrbit small = refine_orbit(p.with(Param::A, a0), {0.0, 0.0}, 1, num.orbit());
    return a0 == p.A ? small : continue_to(small, Param::A, p.A, num.continuation);
  } else if (mode == "state") {
    if (n == 0) throw ConfigError("[" + sec + "] n: required with seed = state");
  } else {
    throw ConfigError("[" + sec + "] seed: expected integrate, primary or state, got '" + mode +
                      "'");
  }
  return refine_orbit(p, guess, n, num.orbit());
}

// True when the curve passes through the orbit of a detection: the curve
// crosses the orbit's A level near its omega and phase-0 state.
bool passes_through(const TongueCurve& t, const PeriodicOrbit& o) {
  const double A0 = o.params.A, w0 = o.params.omega;
  for (std::size_t i = 0; i + 1 < t.points.size(); ++i) {
    const PeriodicOrbit& a = t.points[i].orbit;
    const PeriodicOrbit& b = t.points[i + 1].orbit;
    const bool crosses = (a.params.A < A0) != (b.params.A < A0) || a.params.A == A0;
    if (!crosses) continue;
    const double dA = b.params.A - a.params.A;
    const double f = dA == 0.0 ? 0.0 : (A0 - a.params.A) / dA;
    const double w = a.params.omega + f * (b.params.omega - a.params.omega);
    const OscState s = a.s0 + (b.s0 - a.s0) * f;
    if (std::abs(w - w0) < 1e-4 * (1.0 + std::abs(w0)) &&
        (s - o.s0).norm() < 1e-3 * (1.0 + o.s0.norm()))
      return true;
  }
  return false;
}

TongueKind tongue_kind(const Config& c, bool pitchfork) {
  const std::string k = c.text("tongue", "kind", pitchfork ? "even" : "odd");
  if (k == "odd") return TongueKind::FoldOdd;
  if (k == "even") return TongueKind::PitchforkEven;
  if (k == "broken") return TongueKind::FoldBroken;
  if (k == "isola") return TongueKind::FoldIsola;
  throw ConfigError("[tongue] kind: expected odd, even, broken or isola, got '" + k + "'");
}

} // namespace

CommandResult cmd_sweep(const RunConfig& rc) {
  const Config& c = rc.config;
  c.restrict("sweep", keys({"omega", "A", "initial"}, false));
  const Numerics num = numerics_from(c, rc.tol_scale);
  SweepSpec spec;
  spec.base = model_from(c);
  spec.omega = axis(c, "sweep", "omega");
  spec.A = axis(c, "sweep", "A");
  const auto s0 = c.numbers("sweep", "initial", {0.0, 0.0}, 2);
  spec.initial = {s0[0], s0[1]};
  spec.timing = timing_from(c, "sweep", num.timing);
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("[sweep]: ") + e.what());
  }
  prepare_out(rc.out);
  CommandResult r;
  const RasterFile f = raster_file(scan(spec, rc.threads));
  emit(r, rc.out / "raster.csv", write_raster, f);
  emit_text(r, rc.out / "raster.svg", svg_raster(f));
  return r;
}

CommandResult cmd_curve(const RunConfig& rc) {
  const Config& c = rc.config;
  c.restrict("curve", keys({"param", "range", "switch"}, true));
  const Numerics num = numerics_from(c, rc.tol_scale);
  const ModelParams p = model_from(c);
  const Param active = param_key(c, "curve", "param", Param::Omega);
  const Range rg = range(c, "curve", "range");
  const bool do_switch = c.flag("curve", "switch", false);
  const SweepTiming timing = timing_from(c, "curve", num.timing);
  prepare_out(rc.out);

  CommandResult r;
  Branch primary;
  try {
    primary = continue_branch(seed_orbit(c, "curve", p, num, timing), active, rg.lo, rg.hi,
                              num.continuation);
  } catch (const NumericalError& e) {
    record(r, "branch", e);
    return r;
  }
  std::vector<CurveFile> plotted{branch_file(primary)};
  emit(r, rc.out / "branch.csv", write_curve, plotted[0]);

  if (do_switch) {
    std::vector<const BifurcationPoint*> pfs;
    for (const auto& b : primary.bifurcations)
      if (b.kind == BifurcationKind::Pitchfork && !b.from_asymmetric) pfs.push_back(&b);
    std::vector<std::optional<Branch>> out(2 * pfs.size());
    std::vector<std::optional<ErrorRecord>> errs(pfs.size());
    parallel_for(pfs.size(), rc.threads, [&](std::size_t k) {
      try {
        const auto seeds = switch_branch(*pfs[k], num.continuation);
        out[2 * k] = continue_switched(*pfs[k], seeds.first, rg.lo, rg.hi, num.continuation);
        out[2 * k + 1] = continue_switched(*pfs[k], seeds.second, rg.lo, rg.hi, num.continuation);
      } catch (const NumericalError& e) {
        errs[k] = ErrorRecord{"pitchfork " + std::to_string(k) + " at " +
                                  std::string(to_string(active)) + "=" +
                                  format_double(pfs[k]->params_at.get(active)),
                              e.code(), e.what()};
      }
    });
    for (std::size_t k = 0; k < pfs.size(); ++k) {
      if (errs[k]) r.errors.push_back(*errs[k]);
      for (int side = 0; side < 2; ++side) {
        if (!out[2 * k + side]) continue;
        plotted.push_back(branch_file(*out[2 * k + side]));
        emit(r, rc.out / ("branch_pf" + std::to_string(k) + (side ? "b" : "a") + ".csv"),
             write_curve, plotted.back());
      }
    }
  }
  emit_text(r, rc.out / "branch.svg", svg_amplitude(plotted, active));
  return r;
}

CommandResult cmd_tongue(const RunConfig& rc) {
  const Config& c = rc.config;
  c.restrict("tongue",
             keys({"family", "branch_range", "omega_range", "A_range", "kind", "gammas"}, true));
  const Numerics num = numerics_from(c, rc.tol_scale);
  const ModelParams p = model_from(c);
  const std::string family = c.text("tongue", "family", "fold");
  if (family != "fold" && family != "pitchfork" && family != "sync")
    throw ConfigError("[tongue] family: expected fold, pitchfork or sync, got '" + family + "'");
  const Range wr = range(c, "tongue", "omega_range");
  const Range ar = range(c, "tongue", "A_range");
  std::vector<double> gammas;
  if (c.has("tongue", "gammas")) gammas = c.numbers("tongue", "gammas", {});
  for (double g : gammas)
    if (!(g > 0.0)) throw ConfigError("[tongue] gammas: values must be positive");
  const SweepTiming timing = timing_from(c, "tongue", num.timing);
  prepare_out(rc.out);

  CommandResult r;
  std::vector<CurveFile> plotted;
  if (family == "sync") {
    if (p.model != Model::DuffingVanDerPol)
      throw ConfigError("[tongue] family = sync needs model = duffing-vdp");
    try {
      const SyncTongue s = sync_tongue(p, wr, ar, num.tongue);
      for (const auto* side : {&s.left, &s.right}) {
        CurveFile f = tongue_file(*side);
        f.meta.emplace_back("omega0", format_double(s.omega0));
        f.meta.emplace_back("tip_omega", format_double(s.tip_omega));
        f.meta.emplace_back("tip_A", format_double(s.tip_A));
        plotted.push_back(f);
        emit(r, rc.out / (side == &s.left ? "tongue_left.csv" : "tongue_right.csv"), write_curve, f);
      }
    } catch (const NumericalError& e) {
      record(r, "sync tongue", e);
    }
    if (!plotted.empty()) emit_text(r, rc.out / "tongues.svg", svg_tongues(plotted));
    return r;
  }

  const bool pitchfork = family == "pitchfork";
  const TongueKind kind = tongue_kind(c, pitchfork);
  const Range br = range(c, "tongue", "branch_range", wr);
  Branch branch;
  try {
    branch = continue_branch(seed_orbit(c, "tongue", p, num, timing), Param::Omega, br.lo, br.hi,
                             num.continuation);
  } catch (const NumericalError& e) {
    record(r, "branch", e);
    return r;
  }
  std::vector<const BifurcationPoint*> starts;
  for (const auto& b : branch.bifurcations) {
    if (pitchfork ? (b.kind == BifurcationKind::Pitchfork && !b.from_asymmetric)
                  : b.kind == BifurcationKind::SaddleNode)
      starts.push_back(&b);
  }
  std::vector<std::optional<TongueCurve>> traced(starts.size());
  std::vector<std::optional<ErrorRecord>> errs(starts.size());
  auto item = [&](std::size_t k) {
    return std::string(pitchfork ? "pitchfork" : "fold") + " at omega=" +
           format_double(starts[k]->params_at.omega);
  };
  parallel_for(starts.size(), rc.threads, [&](std::size_t k) {
    try {
      traced[k] = pitchfork ? continue_pitchfork_2p(*starts[k], Param::Omega, Param::A, wr, ar,
                                                    num.tongue, kind)
                            : continue_fold_2p(*starts[k], Param::Omega, Param::A, wr, ar,
                                               num.tongue, kind);
    } catch (const NumericalError& e) {
      errs[k] = ErrorRecord{item(k), e.code(), e.what()};
    }
  });

  // Detections lying on an earlier curve belong to that tongue.
  std::vector<TongueCurve> kept;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    if (errs[k]) r.errors.push_back(*errs[k]);
    if (!traced[k]) continue;
    const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const TongueCurve& t) {
      return passes_through(t, starts[k]->orbit_at);
    });
    if (!duplicate) kept.push_back(std::move(*traced[k]));
  }
  for (std::size_t k = 0; k < kept.size(); ++k) {
    plotted.push_back(tongue_file(kept[k]));
    emit(r, rc.out / ("tongue_" + std::to_string(k) + ".csv"), write_curve, plotted.back());
  }

  if (!gammas.empty()) {
    std::vector<std::vector<GammaStage>> stages(kept.size());
    std::vector<std::optional<ErrorRecord>> gerr(kept.size());
    parallel_for(kept.size(), rc.threads, [&](std::size_t k) {
      try {
        stages[k] = continue_tongue_in_gamma(kept[k], gammas, wr, ar, num.tongue);
      } catch (const NumericalError& e) {
        gerr[k] = ErrorRecord{"tongue " + std::to_string(k) + " in gamma", e.code(), e.what()};
      }
    });
    for (std::size_t k = 0; k < kept.size(); ++k) {
      if (gerr[k]) r.errors.push_back(*gerr[k]);
      for (const auto& st : stages[k]) {
        const std::string stem = "tongue_" + std::to_string(k) + "_gamma_" + format_double(st.gamma);
        plotted.push_back(tongue_file(st.tongue));
        emit(r, rc.out / (stem + ".csv"), write_curve, plotted.back());
        emit(r, rc.out / (stem + "_path.csv"), write_curve, tongue_file(st.path));
      }
    }
  }
  emit_text(r, rc.out / "tongues.svg", svg_tongues(plotted));
  return r;
}

CommandResult cmd_orbit(const RunConfig& rc) {
  const Config& c = rc.config;
  c.restrict("orbit", keys({"samples"}, true));
  const Numerics num = numerics_from(c, rc.tol_scale);
  const ModelParams p = model_from(c);
  const int samples = c.integer("orbit", "samples", 512);
  if (samples < 2) throw ConfigError("[orbit] samples: must be at least 2");
  const SweepTiming timing = timing_from(c, "orbit", num.timing);
  prepare_out(rc.out);

  CommandResult r;
  try {
    const PeriodicOrbit o = seed_orbit(c, "orbit", p, num, timing);
    emit(r, rc.out / "orbit.txt", write_orbit_report, orbit_report(o));
    const Trajectory tr =
        sample_trajectory(o.params, o.s0, 0.0, o.period(), samples, true, num.ode());
    TrajectoryFile f;
    for (const auto& s : tr.samples) f.rows.push_back({s.t, s.s.x, s.s.v});
    emit(r, rc.out / "orbit_trajectory.csv", write_trajectory, f);
  } catch (const NumericalError& e) {
    record(r, "orbit", e);
  }
  return r;
}

CommandResult cmd_natfreq(const RunConfig& rc) {
  const Config& c = rc.config;
  c.restrict("natfreq", {"x_max", "range"});
  numerics_from(c, rc.tol_scale);
  std::vector<double> xs;
  if (c.has("natfreq", "x_max") == c.has("natfreq", "range"))
    throw ConfigError("[natfreq]: give exactly one of x_max and range");
  if (c.has("natfreq", "x_max")) {
    xs = c.numbers("natfreq", "x_max", {});
  } else {
    const auto v = c.numbers("natfreq", "range", {}, 3);
    const int count = static_cast<int>(v[2]);
    if (!(v[0] > 0.0) || v[1] < v[0] || count < 1 || count != v[2])
      throw ConfigError("[natfreq] range: expected lo hi count with 0 < lo <= hi");
    for (int i = 0; i < count; ++i)
      xs.push_back(count == 1 ? v[0] : v[0] * std::pow(v[1] / v[0], double(i) / (count - 1)));
  }
  for (double x : xs)
    if (!(x > 0.0)) throw ConfigError("[natfreq] x_max: values must be positive");
  prepare_out(rc.out);
  CommandResult r;
  NatfreqFile f;
  for (double x : xs) f.rows.push_back({x, natural_period(x)});
  emit(r, rc.out / "natfreq.csv", write_natfreq, f);
  return r;
}

CommandResult run_command(const RunConfig& rc) {
  CommandResult r;
  try {
    if (rc.command == "sweep") r = cmd_sweep(rc);
    else if (rc.command == "curve") r = cmd_curve(rc);
    else if (rc.command == "tongue") r = cmd_tongue(rc);
    else if (rc.command == "orbit") r = cmd_orbit(rc);
    else if (rc.command == "natfreq") r = cmd_natfreq(rc);
    else throw ConfigError("unknown subcommand '" + rc.command + "'");
    r.exit_code = r.errors.empty() ? kExitOk : kExitNumerical;
  } catch (const ConfigError& e) {
    r.exit_code = kExitConfig;
    r.errors.push_back({rc.command, "ConfigError", e.what()});
  } catch (const InvalidArgument& e) {
    r.exit_code = kExitConfig;
    r.errors.push_back({rc.command, "InvalidArgument", e.what()});
  } catch (const NumericalError& e) {
    r.exit_code = kExitNumerical;
    record(r, rc.command, e);
  } catch (const IoError& e) {
    r.exit_code = kExitIo;
    r.errors.push_back({rc.command, "IoError", e.what()});
  } catch (const std::filesystem::filesystem_error& e) {
    r.exit_code = kExitIo;
    r.errors.push_back({rc.command, "IoError", e.what()});
  }
  if (!r.errors.empty()) {
    // Best effort: the output directory itself may be what failed.
    try {
      std::ostringstream ss;
      write_errors(ss, r.errors);
      std::error_code ec;
      std::filesystem::create_directories(rc.out, ec);
      if (std::filesystem::is_directory(rc.out, ec)) {
        save_text(rc.out / "errors.csv", ss.str());
        r.files.push_back(rc.out / "errors.csv");
      }
    } catch (const std::exception&) {
    }
  }
  return r;
}

} // namespace nlres
