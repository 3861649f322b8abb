// Command-line front end: simulate, reconstruct, sweep, report.
// Thin shell over the library; all numeric work lives in the headers.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ghostkit/ghostkit.hpp"

namespace fs = std::filesystem;
using namespace ghostkit;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw io_error("cannot open for writing: " + path.string());
  out << text;
  if (!out)
    throw io_error("write failed: " + path.string());
}

// Raw estimator output: magic "GIMG", width u32, height u32, then
// width*height binary64 values, all little-endian.
void write_raw_image(const Grid<double>& img, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw io_error("cannot open for writing: " + path.string());
  std::vector<std::uint8_t> buf;
  const char magic[4] = {'G', 'I', 'M', 'G'};
  buf.insert(buf.end(), magic, magic + 4);
  ghostkit::detail::put_u32(buf, img.width());
  ghostkit::detail::put_u32(buf, img.height());
  for (double v : img)
    ghostkit::detail::put_f64(buf, v);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out)
    throw io_error("write failed: " + path.string());
}

std::string lower(std::string s) {
  for (char& c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct CliArgs {
  std::string config_path;
  std::string store_path;
  std::string out_dir;
  std::string method;
  std::uint64_t frames = 0;
  std::uint64_t k = 0;
  double t0_plus = -1.0;
  double t0_minus = -1.0;
  std::optional<std::uint64_t> seed;
};

int cmd_simulate(const CliArgs& args) {
  RunConfig cfg = load_config(args.config_path);
  if (args.seed)
    cfg.source.master_seed = *args.seed;
  if (args.frames)
    cfg.frames = args.frames;
  if (!args.out_dir.empty())
    cfg.out_dir = args.out_dir;
  if (!args.store_path.empty())
    cfg.store_name = args.store_path;

  const TransmissionMask mask =
      resolve_mask(cfg.mask, cfg.source.width, cfg.source.height);
  AcquisitionOptions opts;
  opts.noise_sigma_frac = cfg.noise_sigma_frac;
  opts.threads = par::threads_from_env();
  const AcquisitionRun run = run_acquisition(cfg.source, mask, cfg.frames, opts);

  fs::create_directories(cfg.out_dir);
  const fs::path store_path = fs::path(cfg.out_dir) / cfg.store_name;
  save_store(run, store_path.string(), cfg.store_frames);
  write_text(store_path.string() + ".config", render_config(cfg));

  const std::uint64_t n_est = std::min<std::uint64_t>(120, run.frame_count());
  std::printf("store: %s\n", store_path.string().c_str());
  std::printf("frames: %llu\n", static_cast<unsigned long long>(run.frame_count()));
  std::printf("dimensions: %ux%u\n", cfg.source.width, cfg.source.height);
  std::printf("mean transmission estimate (%llu frames): %.12g\n",
              static_cast<unsigned long long>(n_est),
              estimate_mean_transmission(run, n_est));
  return 0;
}

int cmd_reconstruct(const CliArgs& args) {
  const AcquisitionRun run = load_store(args.store_path);
  const Method method = method_from_name(args.method);
  const std::uint64_t frames = args.frames ? args.frames : run.frame_count();
  const int threads = par::threads_from_env();

  ReconImage img;
  if (method == Method::DTTCI) {
    const bool have_pair = args.t0_plus >= 0.0 || args.t0_minus >= 0.0;
    if (args.k && have_pair)
      throw config_error("give either --k or an explicit --t0-plus/--t0-minus "
                         "pair, not both");
    const double t_mean = estimate_mean_transmission(
        run, std::min<std::uint64_t>(120, run.frame_count()));
    Registers regs;
    if (args.k) {
      regs = partition_frames(run, thresholds_for_count(run, args.k, t_mean));
    } else if (have_pair) {
      if (args.t0_plus < 0.0 || args.t0_minus < 0.0)
        throw config_error("explicit thresholds need both --t0-plus and "
                           "--t0-minus");
      regs = partition_frames(run, ThresholdPair{t_mean, args.t0_plus, args.t0_minus});
    } else {
      throw config_error("DTTCI needs --k or an explicit --t0-plus/--t0-minus pair");
    }
    regs = balance_registers(regs, run);
    img = reconstruct_dttci(run, regs, threads);
  } else {
    switch (method) {
    case Method::GI:
      img = reconstruct_gi(run, frames, threads);
      break;
    case Method::NGI:
      img = reconstruct_ngi(run, frames, threads);
      break;
    case Method::DGI:
      img = reconstruct_dgi(run, frames, threads);
      break;
    case Method::CI:
      img = reconstruct_ci(run, frames, threads);
      break;
    default:
      break;
    }
  }

  fs::create_directories(args.out_dir.empty() ? "." : args.out_dir);
  const fs::path dir = args.out_dir.empty() ? "." : args.out_dir;
  const std::string stem =
      lower(method_name(method)) + "_" + std::to_string(img.frames_used);

  write_raw_image(img.data, dir / (stem + ".raw"));
  const Grid<double> unit = normalize_unit(img.data);
  io::write_png(to_gray8(unit), (dir / (stem + ".png")).string());
  io::write_png(to_gray8(equalize_histogram(unit)), (dir / (stem + "_eq.png")).string());

  std::printf("method: %s\n", method_name(method));
  std::printf("frames used: %llu\n",
              static_cast<unsigned long long>(img.frames_used));
  std::printf("wrote: %s{.raw,.png,_eq.png}\n", (dir / stem).string().c_str());
  return 0;
}

int cmd_sweep(const CliArgs& args) {
  const AcquisitionRun run = load_store(args.store_path);
  RunConfig cfg = load_config(args.config_path);
  if (!args.out_dir.empty())
    cfg.out_dir = args.out_dir;

  const TransmissionMask truth =
      resolve_mask(cfg.mask, run.config.width, run.config.height);

  std::vector<SweepCell> cells;
  for (Method m : cfg.sweep.methods)
    for (std::uint64_t n : cfg.sweep.frame_counts)
      cells.push_back({m, n});

  SweepOptions opts;
  opts.thresholds.kind = cfg.sweep.threshold;
  opts.thresholds.n_estimate = cfg.sweep.n_estimate;
  if (cfg.sweep.threshold == ThresholdPolicy::Kind::explicit_pair) {
    const double t_mean =
        cfg.sweep.t_mean
            ? *cfg.sweep.t_mean
            : estimate_mean_transmission(
                  run, std::min<std::uint64_t>(cfg.sweep.n_estimate,
                                               run.frame_count()));
    opts.thresholds.pair =
        ThresholdPair{t_mean, cfg.sweep.t0_plus, cfg.sweep.t0_minus};
  }
  opts.equalize_levels = cfg.sweep.levels;
  opts.threads = par::threads_from_env();

  fs::create_directories(cfg.out_dir);
  if (cfg.sweep.dump_images) {
    opts.image_sink = [&](const SnrRow& row, const Grid<double>& scored) {
      const std::string name = "sweep_" + lower(method_name(row.method)) + "_" +
                               std::to_string(row.frames_used) + ".png";
      io::write_png(to_gray8(scored), (fs::path(cfg.out_dir) / name).string());
    };
  }

  const SnrReport report = sweep(run, truth, cells, opts);
  const fs::path csv_path = fs::path(cfg.out_dir) / "sweep.csv";
  write_text(csv_path, report_csv(report));
  write_text(csv_path.string() + ".config", render_config(cfg));

  std::printf("csv: %s\n", csv_path.string().c_str());
  std::printf("rows: %zu\n", report.rows.size());
  return 0;
}

int cmd_report(const CliArgs& args) {
  const AcquisitionRun run = load_store(args.store_path);
  const std::uint64_t M = run.frame_count();

  double sum_t = 0.0, sum_s = 0.0, sum_r = 0.0;
  double t_min = run.records[0].T, t_max = run.records[0].T;
  for (const FrameRecord& rec : run.records) {
    sum_t += rec.T;
    sum_s += rec.S;
    sum_r += rec.R;
    t_min = std::min(t_min, rec.T);
    t_max = std::max(t_max, rec.T);
  }
  const double mean_t = sum_t / static_cast<double>(M);
  const double ratio = sum_s / sum_r;

  std::printf("store: %s\n", args.store_path.c_str());
  std::printf("dimensions: %ux%u\n", run.config.width, run.config.height);
  std::printf("frames: %llu (%s)\n", static_cast<unsigned long long>(M),
              run.frame_access == AcquisitionRun::FrameAccess::store_file
                  ? "with frame data"
                  : "scalars only");
  std::printf("master seed: %llu\n",
              static_cast<unsigned long long>(run.config.master_seed));
  std::printf("speckle radius: %.12g\n", run.config.speckle_radius);
  std::printf("mean intensity: %.12g\n", run.config.mean_intensity);
  std::printf("mean transmission <S/R>: %.12g\n", mean_t);
  std::printf("ratio <S>/<R>: %.12g\n", ratio);
  std::printf("relative gap: %.6g\n", std::abs(mean_t - ratio) / mean_t);
  std::printf("transmission range: [%.12g, %.12g]\n", t_min, t_max);
  std::printf("pre-estimate (%llu frames): %.12g\n",
              static_cast<unsigned long long>(std::min<std::uint64_t>(120, M)),
              estimate_mean_transmission(run, std::min<std::uint64_t>(120, M)));
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudothermal ghost-imaging simulator and evaluation harness"};
  app.require_subcommand(1);
  CliArgs args;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", args.out_dir, "output directory");
  };

  CLI::App* sim = app.add_subcommand("simulate", "run the virtual experiment");
  sim->add_option("--config", args.config_path, "config file")->required();
  sim->add_option("--store", args.store_path, "store file name override");
  sim->add_option("--frames", args.frames, "frame count override");
  sim->add_option("--seed", args.seed, "master seed override");
  add_common(sim);

  CLI::App* rec = app.add_subcommand("reconstruct", "reconstruct one image");
  rec->add_option("--store", args.store_path, "frame store")->required();
  rec->add_option("--method", args.method, "GI, NGI, DGI, DTTCI, or CI")->required();
  rec->add_option("--frames", args.frames, "frames to use (default: all)");
  rec->add_option("--k", args.k, "register size for DTTCI");
  rec->add_option("--t0-plus", args.t0_plus, "upper threshold magnitude");
  rec->add_option("--t0-minus", args.t0_minus, "lower threshold magnitude");
  add_common(rec);

  CLI::App* swp = app.add_subcommand("sweep", "score methods across frame counts");
  swp->add_option("--store", args.store_path, "frame store")->required();
  swp->add_option("--config", args.config_path, "config with the sweep spec")
      ->required();
  add_common(swp);

  CLI::App* rep = app.add_subcommand("report", "print store summary");
  rep->add_option("--store", args.store_path, "frame store")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0)
      return app.exit(e); // --help
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(args);
    if (rec->parsed())
      return cmd_reconstruct(args);
    if (swp->parsed())
      return cmd_sweep(args);
    if (rep->parsed())
      return cmd_report(args);
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const precondition_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const insufficient_frames_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const insufficient_data_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const empty_register_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const io_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const error& e) {
    // format, corruption, shape, missing frames, degenerate content
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 0;
}
