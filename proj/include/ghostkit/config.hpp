#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ghostkit/errors.hpp"
#include "ghostkit/evaluation.hpp"
#include "ghostkit/recon.hpp"
#include "ghostkit/scene.hpp"
#include "ghostkit/speckle.hpp"

namespace ghostkit {

/// Which object goes in the object arm.
struct MaskSelection {
  enum class Kind { chart, letters, uniform, file };
  Kind kind = Kind::chart;
  double level = 1.0;   ///< uniform only
  std::string path;     ///< file only

  std::string spec() const {
    switch (kind) {
    case Kind::chart:
      return "grayscale-chart";
    case Kind::letters:
      return "binary-letters";
    case Kind::uniform: {
      std::ostringstream os;
      os << "uniform:" << level;
      return os.str();
    }
    case Kind::file:
      return "file:" + path;
    }
    return "";
  }
};

struct SweepSpec {
  std::vector<Method> methods{Method::GI, Method::NGI, Method::DGI, Method::DTTCI};
  std::vector<std::uint64_t> frame_counts{4000, 10000, 20000};
  ThresholdPolicy::Kind threshold = ThresholdPolicy::Kind::count_driven;
  std::uint64_t n_estimate = 120;
  double t0_plus = 0.0;             ///< explicit policy only
  double t0_minus = 0.0;            ///< explicit policy only
  std::optional<double> t_mean;     ///< explicit policy; default: pre-estimate
  std::uint32_t levels = 256;
  bool dump_images = false;
};

/// Everything one experiment needs, mirroring the config file sections.
struct RunConfig {
  SourceConfig source;
  MaskSelection mask;
  std::uint64_t frames = 40000;
  bool store_frames = false;
  double noise_sigma_frac = 0.0;
  SweepSpec sweep;
  std::string out_dir = "out";
  std::string store_name = "store.gifs";
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos)
    return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep))
    out.push_back(trim(item));
  return out;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long r = std::stoull(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw config_error("bad integer for " + key + ": '" + v + "'");
  }
}

inline double parse_f64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double r = std::stod(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw config_error("bad number for " + key + ": '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1")
    return true;
  if (v == "false" || v == "no" || v == "0")
    return false;
  throw config_error("bad boolean for " + key + ": '" + v + "'");
}

inline MaskSelection parse_mask_spec(const std::string& v) {
  MaskSelection sel;
  if (v == "grayscale-chart") {
    sel.kind = MaskSelection::Kind::chart;
  } else if (v == "binary-letters") {
    sel.kind = MaskSelection::Kind::letters;
  } else if (v.rfind("uniform:", 0) == 0) {
    sel.kind = MaskSelection::Kind::uniform;
    sel.level = parse_f64("scene.mask uniform level", v.substr(8));
  } else if (v.rfind("file:", 0) == 0) {
    sel.kind = MaskSelection::Kind::file;
    sel.path = v.substr(5);
    if (sel.path.empty())
      throw config_error("scene.mask file path is empty");
  } else {
    throw config_error("unknown mask '" + v +
                       "' (expected grayscale-chart, binary-letters, "
                       "uniform:LEVEL, or file:PATH)");
  }
  return sel;
}

} // namespace detail

/// Parse the key = value config text. Unknown sections or keys are errors:
/// a config that parses is a config that is fully understood.
inline RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;

  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';')
      continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw config_error("line " + std::to_string(lineno) +
                           ": malformed section header");
      section = detail::trim(t.substr(1, t.size() - 2));
      if (section != "source" && section != "scene" && section != "acquisition" &&
          section != "sweep" && section != "output")
        throw config_error("unknown config section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw config_error("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string value = detail::trim(t.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (section == "source") {
      if (key == "width")
        cfg.source.width = static_cast<std::uint32_t>(detail::parse_u64(qual, value));
      else if (key == "height")
        cfg.source.height = static_cast<std::uint32_t>(detail::parse_u64(qual, value));
      else if (key == "speckle_radius")
        cfg.source.speckle_radius = detail::parse_f64(qual, value);
      else if (key == "mean_intensity")
        cfg.source.mean_intensity = detail::parse_f64(qual, value);
      else if (key == "master_seed")
        cfg.source.master_seed = detail::parse_u64(qual, value);
      else
        throw config_error("unknown key " + qual);
    } else if (section == "scene") {
      if (key == "mask")
        cfg.mask = detail::parse_mask_spec(value);
      else
        throw config_error("unknown key " + qual);
    } else if (section == "acquisition") {
      if (key == "frames")
        cfg.frames = detail::parse_u64(qual, value);
      else if (key == "store_frames")
        cfg.store_frames = detail::parse_bool(qual, value);
      else if (key == "noise_sigma_frac")
        cfg.noise_sigma_frac = detail::parse_f64(qual, value);
      else
        throw config_error("unknown key " + qual);
    } else if (section == "sweep") {
      if (key == "methods") {
        cfg.sweep.methods.clear();
        for (const std::string& name : detail::split(value, ','))
          cfg.sweep.methods.push_back(method_from_name(name));
        if (cfg.sweep.methods.empty())
          throw config_error("sweep.methods is empty");
      } else if (key == "frame_counts") {
        cfg.sweep.frame_counts.clear();
        for (const std::string& n : detail::split(value, ','))
          cfg.sweep.frame_counts.push_back(detail::parse_u64(qual, n));
        if (cfg.sweep.frame_counts.empty())
          throw config_error("sweep.frame_counts is empty");
      } else if (key == "threshold") {
        if (value == "count")
          cfg.sweep.threshold = ThresholdPolicy::Kind::count_driven;
        else if (value == "explicit")
          cfg.sweep.threshold = ThresholdPolicy::Kind::explicit_pair;
        else
          throw config_error("sweep.threshold must be 'count' or 'explicit'");
      } else if (key == "n_estimate") {
        cfg.sweep.n_estimate = detail::parse_u64(qual, value);
      } else if (key == "t0_plus") {
        cfg.sweep.t0_plus = detail::parse_f64(qual, value);
      } else if (key == "t0_minus") {
        cfg.sweep.t0_minus = detail::parse_f64(qual, value);
      } else if (key == "t_mean") {
        cfg.sweep.t_mean = detail::parse_f64(qual, value);
      } else if (key == "levels") {
        cfg.sweep.levels = static_cast<std::uint32_t>(detail::parse_u64(qual, value));
      } else if (key == "dump_images") {
        cfg.sweep.dump_images = detail::parse_bool(qual, value);
      } else {
        throw config_error("unknown key " + qual);
      }
    } else if (section == "output") {
      if (key == "dir")
        cfg.out_dir = value;
      else if (key == "store")
        cfg.store_name = value;
      else
        throw config_error("unknown key " + qual);
    } else {
      throw config_error("line " + std::to_string(lineno) +
                         ": key outside any section");
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw io_error("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Canonical serialization; parse_config_text(render_config(c)) round-trips.
inline std::string render_config(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "[source]\n";
  os << "width = " << cfg.source.width << "\n";
  os << "height = " << cfg.source.height << "\n";
  os << "speckle_radius = " << cfg.source.speckle_radius << "\n";
  os << "mean_intensity = " << cfg.source.mean_intensity << "\n";
  os << "master_seed = " << cfg.source.master_seed << "\n\n";
  os << "[scene]\n";
  os << "mask = " << cfg.mask.spec() << "\n\n";
  os << "[acquisition]\n";
  os << "frames = " << cfg.frames << "\n";
  os << "store_frames = " << (cfg.store_frames ? "true" : "false") << "\n";
  os << "noise_sigma_frac = " << cfg.noise_sigma_frac << "\n\n";
  os << "[sweep]\n";
  os << "methods = ";
  for (std::size_t i = 0; i < cfg.sweep.methods.size(); ++i)
    os << (i ? "," : "") << method_name(cfg.sweep.methods[i]);
  os << "\n";
  os << "frame_counts = ";
  for (std::size_t i = 0; i < cfg.sweep.frame_counts.size(); ++i)
    os << (i ? "," : "") << cfg.sweep.frame_counts[i];
  os << "\n";
  os << "threshold = "
     << (cfg.sweep.threshold == ThresholdPolicy::Kind::count_driven ? "count"
                                                                    : "explicit")
     << "\n";
  os << "n_estimate = " << cfg.sweep.n_estimate << "\n";
  if (cfg.sweep.threshold == ThresholdPolicy::Kind::explicit_pair) {
    os << "t0_plus = " << cfg.sweep.t0_plus << "\n";
    os << "t0_minus = " << cfg.sweep.t0_minus << "\n";
    if (cfg.sweep.t_mean)
      os << "t_mean = " << *cfg.sweep.t_mean << "\n";
  }
  os << "levels = " << cfg.sweep.levels << "\n";
  os << "dump_images = " << (cfg.sweep.dump_images ? "true" : "false") << "\n\n";
  os << "[output]\n";
  os << "dir = " << cfg.out_dir << "\n";
  os << "store = " << cfg.store_name << "\n";
  return os.str();
}

/// Materialize the configured mask at the acquisition dimensions.
inline TransmissionMask resolve_mask(const MaskSelection& sel, std::uint32_t width,
                                     std::uint32_t height) {
  switch (sel.kind) {
  case MaskSelection::Kind::chart:
    return builtin_mask(MaskKind::grayscale_chart, width, height);
  case MaskSelection::Kind::letters:
    return builtin_mask(MaskKind::binary_letters, width, height);
  case MaskSelection::Kind::uniform:
    return builtin_mask(MaskKind::uniform, width, height, sel.level);
  case MaskSelection::Kind::file:
    return load_mask(sel.path, width, height);
  }
  throw config_error("unresolvable mask selection");
}

} // namespace ghostkit
