// SPDX-License-Identifier: Apache-2.0
#include "usct/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "usct/assess.hpp"
#include "usct/config.hpp"
#include "usct/encoding.hpp"
#include "usct/error.hpp"
#include "usct/fwi.hpp"
#include "usct/io.hpp"
#include "usct/manifest.hpp"
#include "usct/noise.hpp"
#include "usct/parallel.hpp"
#include "usct/phantom.hpp"
#include "usct/simd.hpp"
#include "usct/wave.hpp"

namespace usct::cli {

namespace fs = std::filesystem;

namespace {

// Flags shared by every command. Values given on the command line win over
// the config file, which wins over built-in defaults.
struct Common {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string config_path;
  std::string manifest_path;
  bool quiet = false;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  Config config;
  std::ostream* err = nullptr;

  void add_to(CLI::App* cmd) {
    seed_opt = cmd->add_option("--seed", seed, "Random seed");
    threads_opt = cmd->add_option("--threads", threads, "Worker threads (default: USCT_THREADS or all cores)");
    cmd->add_option("--config", config_path, "key = value settings file");
    cmd->add_option("--manifest", manifest_path, "Dataset manifest to create or update");
    cmd->add_flag("--quiet", quiet, "Suppress progress logging");
  }

  void load() {
    if (!config_path.empty()) config = Config::load(config_path);
    if (!seed_opt->count()) seed = static_cast<std::uint64_t>(config.get_int("seed", 0));
    if (!threads_opt->count()) threads = static_cast<int>(config.get_int("threads", 0));
    threads = resolve_threads(threads);
  }

  void log(const std::string& msg) const {
    if (!quiet) *err << "[usct] " << msg << '\n';
  }

  /// Overrides a config key from a flag that was given explicitly.
  template <typename T>
  void override(CLI::Option* opt, const std::string& key, const T& value) {
    if (opt->count()) {
      std::ostringstream os;
      os.precision(17);
      os << value;
      config.set(key, os.str());
    }
  }

  DatasetManifest open_manifest() const {
    if (!manifest_path.empty() && fs::exists(manifest_path)) return read_manifest(manifest_path);
    return {};
  }
  fs::path manifest_dir() const {
    const fs::path dir = fs::path(manifest_path).parent_path();
    return dir.empty() ? fs::path(".") : dir;
  }
  void save_manifest(const DatasetManifest& m) const {
    if (manifest_path.empty()) return;
    write_manifest(manifest_path, m);
    log("manifest " + manifest_path + " updated");
  }
};

AcquisitionConfig acquisition_for_image(Config cfg, int nx) {
  if (!cfg.has("nx")) cfg.set("nx", std::to_string(nx));
  AcquisitionConfig acq = acquisition_from(cfg);
  if (acq.grid.nx != nx) {
    fail(ErrorCode::ShapeMismatch, "image is " + std::to_string(nx) + " px but the config says nx = " +
                                       std::to_string(acq.grid.nx));
  }
  return acq;
}

SoundSpeedMap read_map(const std::string& path, const AcquisitionConfig& acq) {
  return io::unpack_map(io::load(path, io::ContainerKind::SoundSpeed), acq.grid.dx, acq.grid.pad);
}

int image_side(const std::string& path) {
  int nx = 0;
  io::unpack_image(io::load(path, io::ContainerKind::SoundSpeed), &nx);
  return nx;
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// --- phantom ---------------------------------------------------------------

struct PhantomCmd {
  Common common;
  std::string out;
  std::string density = "B";
  CLI::Option* density_opt = nullptr;
  int n_tumors_min = 0;
  int n_tumors_max = 3;
  CLI::Option* tmin_opt = nullptr;
  CLI::Option* tmax_opt = nullptr;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("phantom", "Generate a labeled breast phantom (stem.sos, stem.lbl, stem.msk)");
    cmd->add_option("--out", out, "Output stem")->required();
    density_opt = cmd->add_option("--class", density, "Density class A, B, C or D");
    tmin_opt = cmd->add_option("--tumors-min", n_tumors_min, "Minimum tumor count");
    tmax_opt = cmd->add_option("--tumors-max", n_tumors_max, "Maximum tumor count");
    common.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    common.load();
    common.override(density_opt, "density_class", density);
    common.override(tmin_opt, "n_tumors_min", n_tumors_min);
    common.override(tmax_opt, "n_tumors_max", n_tumors_max);
    const Config& cfg = common.config;
    const AcquisitionConfig acq = acquisition_from(cfg);
    const auto cls = parse_density_class(cfg.get_string("density_class", "B"));
    if (!cls) fail(ErrorCode::ConfigError, "density class must be A, B, C or D");

    PhantomSpec spec = PhantomSpec::for_class(*cls, common.seed);
    // Breast size scales with the field of view unless given.
    const double half = 0.5 * (acq.grid.nx - 1) * acq.grid.dx;
    spec.breast_radius = {cfg.get_double("breast_radius_min", 0.65 * half),
                          cfg.get_double("breast_radius_max", 0.88 * half)};
    spec.min_tumors = static_cast<int>(cfg.get_int("n_tumors_min", 0));
    spec.max_tumors = static_cast<int>(cfg.get_int("n_tumors_max", 3));

    const LabeledPhantom p = generate_phantom(spec, acq.grid);
    write_phantom(out, p);
    common.log("phantom class " + std::string(to_string(*cls)) + " seed " + std::to_string(common.seed) +
               ": fibroglandular fraction " + fmt_g(fibroglandular_fraction(p)) + ", speed range [" +
               fmt_g(p.map.min()) + ", " + fmt_g(p.map.max()) + "] m/s -> " + out + ".{sos,lbl,msk}");

    if (!common.manifest_path.empty()) {
      DatasetManifest m = common.open_manifest();
      m.set_config(acq);
      const fs::path base = common.manifest_dir();
      m.phantoms.push_back({fs::relative(fs::absolute(out), fs::absolute(base)).generic_string(), common.seed,
                            std::string(to_string(*cls))});
      m.add_file(base, with_suffix(out, ".sos"), "phantom");
      m.add_file(base, with_suffix(out, ".lbl"), "labels");
      m.add_file(base, with_suffix(out, ".msk"), "mask");
      common.save_manifest(m);
    }
  }
};

// --- simulate --------------------------------------------------------------

struct SimulateCmd {
  Common common;
  std::string phantom;
  std::string out;
  double snr_db = std::numeric_limits<double>::infinity();
  CLI::Option* snr_opt = nullptr;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate", "Simulate the per-source waveform tensor for a speed map");
    cmd->add_option("--phantom", phantom, "Speed-of-sound map (.sos)")->required();
    cmd->add_option("--out", out, "Output waveform tensor")->required();
    snr_opt = cmd->add_option("--snr-db", snr_db, "Add white Gaussian noise at this SNR (default: none)");
    common.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    common.load();
    common.override(snr_opt, "snr_db", snr_db);
    const AcquisitionConfig acq = acquisition_for_image(common.config, image_side(phantom));
    const SoundSpeedMap c = read_map(phantom, acq);
    const double cfl = cfl_check(c, acq.dt);
    common.log("simulate " + std::to_string(acq.array.n_transmitters()) + " sources x " +
               std::to_string(acq.array.n_receivers()) + " receivers x " + std::to_string(acq.n_steps) +
               " steps, CFL " + fmt_g(cfl) + ", " + std::to_string(common.threads) + " threads, kernels " +
               std::string(simd::to_string(simd::active_isa())));
    const auto t0 = std::chrono::steady_clock::now();
    MeasurementTensor d = simulate_acquisition(c, acq, common.threads);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double snr = common.config.get_double("snr_db", std::numeric_limits<double>::infinity());
    if (std::isfinite(snr)) {
      d = add_noise(d, snr, common.seed);
      common.log("noise at " + fmt_g(snr) + " dB, seed " + std::to_string(common.seed));
    }
    io::save(out, io::pack_tensor(d));
    common.log("wrote " + out + " in " + fmt_g(secs) + " s");

    if (!common.manifest_path.empty()) {
      DatasetManifest m = common.open_manifest();
      m.set_config(acq);
      if (std::isfinite(snr)) m.noise = NoiseDescriptor{snr, common.seed};
      m.add_file(common.manifest_dir(), out, "waveform");
      common.save_manifest(m);
    }
  }
};

// --- encode ----------------------------------------------------------------

struct EncodeCmd {
  Common common;
  std::string data;
  std::string out;
  std::string weights_out;
  std::string kind = "rademacher";
  int channels = 1;
  CLI::Option* kind_opt = nullptr;
  CLI::Option* channels_opt = nullptr;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("encode", "Contract a waveform tensor with a source-encoding matrix");
    cmd->add_option("--data", data, "Per-source waveform tensor")->required();
    cmd->add_option("--out", out, "Encoded waveform tensor")->required();
    cmd->add_option("--weights-out", weights_out, "Write the encoding matrix here");
    kind_opt = cmd->add_option("--encoder", kind, "identity, subsample, rademacher or gaussian");
    channels_opt = cmd->add_option("--channels", channels, "Encoded channel count L");
    common.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    common.load();
    common.override(kind_opt, "encoder", kind);
    common.override(channels_opt, "channels", channels);
    const auto d = io::unpack_tensor(io::load(data, io::ContainerKind::Waveform));
    const std::string name = common.config.get_string("encoder", "rademacher");
    const auto k = parse_encoder_kind(name);
    if (!k) fail(ErrorCode::ConfigError, "unknown encoder '" + name + "'");
    const int l = *k == EncoderKind::Identity ? d.n_sources()
                                              : static_cast<int>(common.config.get_int("channels", 1));
    const EncodingMatrix w = make_encoder(*k, l, d.n_sources(), common.seed);
    const MeasurementTensor e = encode_tensor(w, d);
    io::save(out, io::pack_tensor(e));
    if (!weights_out.empty()) io::save(weights_out, io::pack_encoder(w));
    common.log("encoded " + std::to_string(d.n_sources()) + " sources into " + std::to_string(l) + " " + name +
               " channels -> " + out);

    if (!common.manifest_path.empty()) {
      DatasetManifest m = common.open_manifest();
      const fs::path base = common.manifest_dir();
      m.encoder = EncoderDescriptor{name, l, d.n_sources(), common.seed,
                                    weights_out.empty() ? std::string()
                                                        : fs::relative(fs::absolute(weights_out), fs::absolute(base))
                                                              .generic_string()};
      m.add_file(base, out, "encoded-waveform");
      if (!weights_out.empty()) m.add_file(base, weights_out, "encoder");
      common.save_manifest(m);
    }
  }
};

// --- fwi -------------------------------------------------------------------

struct FwiCmd {
  Common common;
  std::string data;
  std::string init = "water";
  std::string out;
  std::string log_path;
  int iters = 300;
  std::string optimizer = "adam";
  std::string encoder = "rademacher";
  double step_size = 1.0;
  int channels = 1;
  double lo = 1300.0;
  double hi = 1700.0;
  int log_every = 10;
  std::ostream* results_out = nullptr;
  CLI::Option *iters_opt{}, *opt_opt{}, *enc_opt{}, *step_opt{}, *chan_opt{}, *lo_opt{}, *hi_opt{};

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("fwi", "Reconstruct a speed-of-sound map by full-waveform inversion");
    cmd->add_option("--data", data, "Per-source waveform tensor")->required();
    cmd->add_option("--init", init, "Initial guess: 'water' or a .sos file");
    cmd->add_option("--out", out, "Reconstructed map (.sos)")->required();
    cmd->add_option("--log", log_path, "Convergence log (default: standard output)");
    iters_opt = cmd->add_option("--iters", iters, "Iterations");
    opt_opt = cmd->add_option("--optimizer", optimizer, "sgd, momentum, nesterov or adam");
    enc_opt = cmd->add_option("--encoder", encoder, "rademacher, gaussian or none (full batch)");
    step_opt = cmd->add_option("--step-size", step_size, "Optimizer step size");
    chan_opt = cmd->add_option("--channels", channels, "Encoded channels per iteration");
    lo_opt = cmd->add_option("--bounds-lo", lo, "Lower speed bound, m/s");
    hi_opt = cmd->add_option("--bounds-hi", hi, "Upper speed bound, m/s");
    cmd->add_option("--progress-every", log_every, "Log every N iterations");
    common.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    common.load();
    common.override(iters_opt, "iters", iters);
    common.override(opt_opt, "optimizer", optimizer);
    common.override(enc_opt, "encoder", encoder);
    common.override(step_opt, "step_size", step_size);
    common.override(chan_opt, "channels", channels);
    common.override(lo_opt, "bounds_lo", lo);
    common.override(hi_opt, "bounds_hi", hi);
    const Config& cfg = common.config;

    MeasurementTensor d = io::unpack_tensor(io::load(data, io::ContainerKind::Waveform));
    Config acq_cfg = cfg;
    if (!acq_cfg.has("n_steps")) acq_cfg.set("n_steps", std::to_string(d.n_steps()));
    AcquisitionConfig acq = acquisition_from(acq_cfg);
    SoundSpeedMap c0 = init == "water" ? SoundSpeedMap::uniform(acq.grid, kWaterSpeed) : read_map(init, acq);
    if (c0.grid().nx != acq.grid.nx) fail(ErrorCode::ShapeMismatch, "initial guess does not match the config grid");

    FwiProblem problem{std::move(d), acq, c0, {cfg.get_double("bounds_lo", 1300.0), cfg.get_double("bounds_hi", 1700.0)}};

    OptimizerSettings os;
    const auto ok = parse_optimizer_kind(cfg.get_string("optimizer", "adam"));
    if (!ok) fail(ErrorCode::ConfigError, "unknown optimizer '" + cfg.get_string("optimizer", "") + "'");
    os.kind = *ok;
    os.step_size = cfg.get_double("step_size", 1.0);

    ReconstructOptions ro;
    ro.n_iters = static_cast<int>(cfg.get_int("iters", 300));
    const std::string enc = cfg.get_string("encoder", "rademacher");
    if (enc == "none") {
      ro.encoder = std::nullopt;
    } else {
      ro.encoder = parse_encoder_kind(enc);
      if (!ro.encoder) fail(ErrorCode::ConfigError, "unknown encoder '" + enc + "'");
    }
    ro.channels_per_iter = static_cast<int>(cfg.get_int("channels", 1));
    ro.seed = common.seed;
    ro.threads = common.threads;

    common.log("fwi " + std::to_string(ro.n_iters) + " iterations, " + std::string(to_string(os.kind)) +
               " step " + fmt_g(os.step_size) + ", encoder " + enc + ", seed " + std::to_string(ro.seed));
    const auto result = reconstruct(problem, os, ro, [&](const IterationRecord& r, const SoundSpeedMap&) {
      if (log_every > 0 && (r.iteration % log_every == 0 || r.iteration + 1 == ro.n_iters)) {
        common.log("iter " + std::to_string(r.iteration) + " loss " + fmt_g(r.loss) + " step " +
                   fmt_g(r.step_norm) + " t " + fmt_g(r.wall_time) + " s");
      }
      return true;
    });

    io::save(out, io::pack_map(result.estimate));
    if (log_path.empty()) {
      write_convergence_log(*results_out, result.log);
    } else {
      std::ostringstream os_log;
      write_convergence_log(os_log, result.log);
      const std::string text = os_log.str();
      io::write_file_atomic(log_path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    }
    if (!common.manifest_path.empty()) {
      DatasetManifest m = common.open_manifest();
      m.add_file(common.manifest_dir(), out, "reconstruction");
      if (!log_path.empty()) m.add_file(common.manifest_dir(), log_path, "convergence-log");
      common.save_manifest(m);
    }
    if (result.error) {
      common.log("stopped early after " + std::to_string(result.log.size()) + " iterations; partial result saved");
      throw *result.error;
    }
    common.log("wrote " + out);
  }
};

// --- assess ----------------------------------------------------------------

struct AssessCmd {
  Common common;
  std::string est;
  std::string truth;
  std::string prob;
  std::string mask;
  std::string name;
  std::string format = "table";
  double threshold = kDefaultSegmentationThreshold;
  CLI::Option* thr_opt = nullptr;
  std::ostream* out = nullptr;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("assess", "Image-quality and detection metrics");
    cmd->add_option("--est", est, "Estimated map (.sos)");
    cmd->add_option("--truth", truth, "True map (.sos)");
    cmd->add_option("--prob", prob, "Tumor probability map (.sos container)");
    cmd->add_option("--mask", mask, "True tumor mask (.msk)");
    thr_opt = cmd->add_option("--threshold", threshold, "Detection threshold; 'corner' picks the ROC corner")
                  ->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--name", name, "Row label");
    cmd->add_option("--format", format, "table or kv")->check(CLI::IsMember({"table", "kv"}));
    common.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    common.load();
    common.override(thr_opt, "threshold", threshold);
    if (est.empty() != truth.empty()) fail(ErrorCode::InvalidArgument, "--est and --truth go together");
    if (prob.empty() != mask.empty()) fail(ErrorCode::InvalidArgument, "--prob and --mask go together");
    if (est.empty() && prob.empty()) fail(ErrorCode::InvalidArgument, "nothing to assess");

    AssessmentReport r;
    r.name = name.empty() ? (est.empty() ? prob : est) : name;
    if (!est.empty()) {
      int ne = 0;
      int nt = 0;
      const auto e = io::unpack_image(io::load(est, io::ContainerKind::SoundSpeed), &ne);
      const auto t = io::unpack_image(io::load(truth, io::ContainerKind::SoundSpeed), &nt);
      if (ne != nt) fail(ErrorCode::ShapeMismatch, "estimate and truth sizes differ");
      r.rmse = usct::rmse(e, t);
      r.ssim = usct::ssim(e, t, nt);
    }
    if (!prob.empty()) {
      int np = 0;
      int nm = 0;
      const auto p = io::unpack_image(io::load(prob, io::ContainerKind::SoundSpeed), &np);
      const auto m = io::unpack_mask(io::load(mask, io::ContainerKind::Mask), &nm);
      if (np != nm) fail(ErrorCode::ShapeMismatch, "probability map and mask sizes differ");
      const RocCurve curve = roc_sweep(p, m, np);
      if (curve.tumors_present) {
        r.auc = curve.auc;
        r.corner_threshold = select_threshold(curve);
      }
      r.threshold = common.config.get_double("threshold", kDefaultSegmentationThreshold);
      r.dice = usct::dice(p, m, np, *r.threshold);
    }
    if (format == "kv") {
      write_report_summary(*out, r);
    } else {
      write_report_table(*out, std::span<const AssessmentReport>(&r, 1));
    }
  }
};

// --- info ------------------------------------------------------------------

struct InfoCmd {
  Common common;
  std::vector<std::string> files;
  std::ostream* out = nullptr;

  void setup(CLI::App& app) {
    auto* cmd = app.add_subcommand("info", "Describe containers; with --manifest, verify a dataset");
    cmd->add_option("files", files, "Container files");
    common.add_to(cmd);
    cmd->callback([this] { run(); });
  }

  void run() {
    common.load();
    for (const auto& f : files) {
      const auto bytes = io::read_file(f);
      const auto kind = io::sniff(bytes);
      if (!kind) throw FormatError(ErrorCode::FormatError, f + ": unknown container magic", 0);
      const io::Container c = io::parse(bytes, *kind);
      *out << f << ": " << io::magic(*kind) << " v" << io::kFormatVersion << " dims";
      for (auto d : c.dims) *out << ' ' << d;
      char sum[20];
      std::snprintf(sum, sizeof sum, "%016llx", static_cast<unsigned long long>(io::fnv1a64(c.payload)));
      *out << " payload_fnv1a64 " << sum << " checksum ok";
      if (*kind != io::ContainerKind::Mask) {
        const auto v = io::to_floats(c);
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        *out << " min " << fmt_g(*lo) << " max " << fmt_g(*hi);
      }
      *out << '\n';
    }
    if (!common.manifest_path.empty()) {
      const DatasetManifest m = read_manifest(common.manifest_path);
      verify_manifest(m, common.manifest_dir());
      *out << common.manifest_path << ": config " << m.config_hash << ", " << m.files.size()
           << " files verified\n";
    }
    if (files.empty() && common.manifest_path.empty()) {
      *out << "kernels: " << simd::to_string(simd::active_isa()) << " (detected "
           << simd::to_string(simd::detected_isa()) << ")\n";
      *out << "threads: " << common.threads << '\n';
      *out << canonical_text(acquisition_from(common.config));
    }
  }
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ultrasound computed tomography toolkit", "usct"};
  app.require_subcommand(1);
  PhantomCmd phantom;
  SimulateCmd simulate;
  EncodeCmd encode;
  FwiCmd fwi;
  AssessCmd assess;
  InfoCmd info;
  for (Common* c : {&phantom.common, &simulate.common, &encode.common, &fwi.common, &assess.common, &info.common}) {
    c->err = &err;
  }
  assess.out = &out;
  fwi.results_out = &out;
  info.out = &out;
  phantom.setup(app);
  simulate.setup(app);
  encode.setup(app);
  fwi.setup(app);
  assess.setup(app);
  info.setup(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usct: " << e.what() << '\n';
    return kUsageExit;
  } catch (const Error& e) {
    err << "usct: error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "usct: internal error: " << e.what() << '\n';
    return kInternalExit;
  }
  return 0;
}

}  // namespace usct::cli
