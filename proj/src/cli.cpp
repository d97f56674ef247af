#include "ieval/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ieval/dsp.hpp"
#include "ieval/errors.hpp"
#include "ieval/instrument.hpp"
#include "ieval/parallel.hpp"
#include "ieval/pitch.hpp"
#include "ieval/synth.hpp"
#include "ieval/tc.hpp"
#include "ieval/wav.hpp"

namespace ieval::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct ScaleFlags {
  std::size_t fft = 2048;
  std::size_t hop = 512;
  std::size_t mel = 80;
  std::size_t mfcc = 13;
  double power = 1.0;
  double eps = 1e-5;
  std::string scales_file;
  std::string normalize = "mean";
  bool exclude_dc = false;

  void add_to(CLI::App& cmd, bool with_scales_file = true) {
    cmd.add_option("--fft", fft, "FFT size (power of two)")->capture_default_str();
    cmd.add_option("--hop", hop, "STFT hop in samples")->capture_default_str();
    cmd.add_option("--mel", mel, "mel bands M")->capture_default_str();
    cmd.add_option("--mfcc", mfcc, "retained cepstral coefficients m")->capture_default_str();
    cmd.add_option("--power", power, "magnitude exponent p")->capture_default_str();
    cmd.add_option("--eps", eps, "log floor")->capture_default_str();
    cmd.add_flag("--exclude-dc", exclude_dc, "retain coefficients 1..m instead of 0..m-1");
    if (with_scales_file) {
      cmd.add_option("--scales", scales_file, "JSON array of per-scale settings")
          ->check(CLI::ExistingFile);
      cmd.add_option("--normalize", normalize, "pair aggregation")
          ->check(CLI::IsMember({"mean", "none"}))
          ->capture_default_str();
    }
  }

  ScaleConfig base() const {
    ScaleConfig s;
    s.fft_size = fft;
    s.hop_size = hop;
    s.mel_bands = mel;
    s.lifter_order = mfcc;
    s.power = power;
    s.log_floor = eps;
    return s;
  }

  TcConfig resolve() const {
    TcConfig cfg;
    cfg.normalization = normalize == "none" ? Normalization::None : Normalization::Mean;
    cfg.exclude_dc = exclude_dc;
    if (scales_file.empty()) {
      cfg.scales = {base()};
    } else {
      std::ifstream in(scales_file);
      json doc;
      try {
        doc = json::parse(in);
        cfg.scales.clear();
        for (const auto& item : doc) {
          ScaleConfig s = base();
          s.fft_size = item.value("fft", s.fft_size);
          s.hop_size = item.value("hop", s.hop_size);
          s.mel_bands = item.value("mel", s.mel_bands);
          s.lifter_order = item.value("mfcc", s.lifter_order);
          s.power = item.value("power", s.power);
          s.log_floor = item.value("eps", s.log_floor);
          cfg.scales.push_back(s);
        }
      } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("bad scales file: ") + e.what(),
                    scales_file);
      }
    }
    cfg.validate();
    return cfg;
  }
};

struct YinFlags {
  std::size_t frame = 4096;
  std::size_t hop = 1024;
  double threshold = 0.10;
  double fmin = 25.0;
  double fmax = 4400.0;
  bool no_prefilter = false;
  std::string mode = "mean";

  void add_to(CLI::App& cmd, const std::string& hop_flag, bool with_mode) {
    cmd.add_option("--frame", frame, "YIN frame size")->capture_default_str();
    cmd.add_option(hop_flag, hop, "YIN hop")->capture_default_str();
    cmd.add_option("--threshold", threshold, "YIN absolute threshold")->capture_default_str();
    cmd.add_option("--fmin", fmin, "lowest detectable f0 (Hz)")->capture_default_str();
    cmd.add_option("--fmax", fmax, "highest detectable f0 (Hz)")->capture_default_str();
    cmd.add_flag("--no-prefilter", no_prefilter, "skip the low-pass at fmax before YIN");
    if (with_mode) {
      cmd.add_option("--mode", mode, "MAD aggregation")
          ->check(CLI::IsMember({"mean", "median"}))
          ->capture_default_str();
    }
  }

  YinConfig resolve() const {
    YinConfig cfg;
    cfg.frame_size = frame;
    cfg.hop_size = hop;
    cfg.threshold = threshold;
    cfg.f_min = fmin;
    cfg.f_max = fmax;
    cfg.prefilter = !no_prefilter;
    return cfg;
  }

  MadMode mad_mode() const { return mode == "median" ? MadMode::MedianAbs : MadMode::MeanAbs; }
};

struct LoadFlags {
  std::string length_policy = "pad";
  bool validate_grid = false;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--length-policy", length_policy,
                   "pad | truncate | <seconds>s (fixed duration)")
        ->capture_default_str();
    cmd.add_flag("--validate-grid", validate_grid,
                 "require MIDI 21-108 and velocities {25,50,75,100,127}");
  }

  LoadOptions resolve() const {
    LoadOptions opt;
    opt.validate_grid = validate_grid;
    opt.policy = length_policy == "truncate" ? LengthPolicy::truncate_to_min()
                                             : LengthPolicy::pad_to_max();
    return opt;
  }

  // Fixed duration needs the sample rate, so it is applied after loading.
  std::optional<double> fixed_seconds() const {
    if (length_policy == "pad" || length_policy == "truncate") return std::nullopt;
    if (length_policy.size() < 2 || length_policy.back() != 's') {
      throw Error(ErrorCode::InvalidConfig, "length policy must be pad, truncate or <seconds>s");
    }
    try {
      std::size_t used = 0;
      const std::string number = length_policy.substr(0, length_policy.size() - 1);
      const double secs = std::stod(number, &used);
      if (used == number.size() && secs > 0.0) return secs;
    } catch (const std::exception&) {
    }
    throw Error(ErrorCode::InvalidConfig, "bad fixed length '" + length_policy + "'");
  }
};

Instrument load(const std::string& dir, const LoadFlags& flags) {
  Instrument inst = load_instrument(dir, flags.resolve());
  if (auto secs = flags.fixed_seconds()) {
    const auto len = static_cast<std::size_t>(std::llround(*secs * inst.sample_rate()));
    return Instrument::assemble(inst.name(), inst.samples(), LengthPolicy::fixed(len));
  }
  return inst;
}

json scale_json(const ScaleConfig& s) {
  json j;
  j["fft"] = s.fft_size;
  j["hop"] = s.hop_size;
  j["window"] = "hann";
  j["mel"] = s.mel_bands;
  j["mfcc"] = s.lifter_order;
  j["power"] = s.power;
  j["eps"] = s.log_floor;
  return j;
}

json tc_config_json(const TcConfig& cfg) {
  json j;
  j["scales"] = json::array();
  for (const auto& s : cfg.scales) j["scales"].push_back(scale_json(s));
  j["normalization"] = to_string(cfg.normalization);
  j["exclude_dc"] = cfg.exclude_dc;
  return j;
}

json yin_config_json(const YinConfig& cfg) {
  json j;
  j["frame"] = cfg.frame_size;
  j["hop"] = cfg.hop_size;
  j["threshold"] = cfg.threshold;
  j["fmin"] = cfg.f_min;
  j["fmax"] = cfg.f_max;
  j["prefilter"] = cfg.prefilter;
  return j;
}

json load_config_json(const LoadFlags& flags) {
  json j;
  j["length_policy"] = flags.length_policy;
  j["validate_grid"] = flags.validate_grid;
  return j;
}

json with_schema(const json& body) {
  json j;
  j["schema"] = kSchemaVersion;
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write output", path);
  f << text;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write file", path);
  f << text;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> values;
  try {
    if (auto colon = text.find(':'); colon != std::string::npos) {
      const int lo = std::stoi(text.substr(0, colon));
      const int hi = std::stoi(text.substr(colon + 1));
      if (lo > hi) throw std::invalid_argument("empty range");
      for (int v = lo; v <= hi; ++v) values.push_back(v);
      return values;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(std::stoi(item));
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad ") + what + " list '" + text + "'");
  }
  if (values.empty()) throw Error(ErrorCode::InvalidConfig, std::string("empty ") + what + " list");
  return values;
}

std::string liftergram_csv(const LifteredFeature& feat, const ScaleConfig& cfg, int rate) {
  std::string out = "# bands=" + std::to_string(feat.y.rows()) +
                    " frames=" + std::to_string(feat.y.cols()) +
                    " m=" + std::to_string(cfg.lifter_order) + " fft=" + std::to_string(cfg.fft_size) +
                    " hop=" + std::to_string(cfg.hop_size) + " rate=" + std::to_string(rate) + "\n";
  char buf[40];
  for (std::size_t r = 0; r < feat.y.rows(); ++r) {
    for (std::size_t c = 0; c < feat.y.cols(); ++c) {
      std::snprintf(buf, sizeof buf, c == 0 ? "%.17g" : ",%.17g", feat.y(r, c));
      out += buf;
    }
    out += "\n";
  }
  return out;
}

json entry_json(const PitchEntry& e) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["pitch"] = e.key.pitch;
  j["velocity"] = e.key.velocity;
  j["f0_hz"] = opt(e.f0_hz);
  j["midi_est"] = opt(e.midi_est);
  j["deviation"] = opt(e.deviation);
  return j;
}

json error_json(const Error& e) {
  json j;
  j["schema"] = kSchemaVersion;
  j["error"] = to_string(e.code());
  j["message"] = e.what();
  j["context"] = e.context();
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluate sample-based instruments: timbral consistency and pitch accuracy",
               kToolName};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kVersion);

  std::optional<int> threads;
  bool print_config = false;
  app.add_option("--threads", threads, "worker threads (default: $INSTRUMENT_EVAL_THREADS or auto)");
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");

  // tc
  auto* tc_cmd = app.add_subcommand("tc", "timbral consistency of an instrument directory");
  std::string tc_dir, tc_out, tc_pairs;
  ScaleFlags tc_flags;
  LoadFlags tc_load;
  tc_cmd->add_option("DIR", tc_dir, "instrument directory")->required()->check(CLI::ExistingDirectory);
  tc_flags.add_to(*tc_cmd);
  tc_load.add_to(*tc_cmd);
  tc_cmd->add_option("--pair-matrix", tc_pairs, "write the K x K pair matrix as CSV");
  tc_cmd->add_option("-o,--output", tc_out, "output JSON path (default stdout)");

  // pitch
  auto* pitch_cmd = app.add_subcommand("pitch", "YIN median pitch of a file or directory");
  std::string pitch_in, pitch_out;
  YinFlags pitch_flags;
  LoadFlags pitch_load;
  pitch_cmd->add_option("INPUT", pitch_in, "WAV file or instrument directory")
      ->required()
      ->check(CLI::ExistingPath);
  pitch_flags.add_to(*pitch_cmd, "--hop", false);
  pitch_load.add_to(*pitch_cmd);
  pitch_cmd->add_option("-o,--output", pitch_out, "output JSON path (default stdout)");

  // mad
  auto* mad_cmd = app.add_subcommand("mad", "pitch deviation (MAD) against metadata pitches");
  std::string mad_dir, mad_out;
  YinFlags mad_flags;
  LoadFlags mad_load;
  mad_cmd->add_option("DIR", mad_dir, "instrument directory")->required()->check(CLI::ExistingDirectory);
  mad_flags.add_to(*mad_cmd, "--hop", true);
  mad_load.add_to(*mad_cmd);
  mad_cmd->add_option("-o,--output", mad_out, "output JSON path (default stdout)");

  // report
  auto* report_cmd = app.add_subcommand("report", "timbral consistency and MAD in one report");
  std::string report_dir, report_out, report_pairs;
  ScaleFlags report_scale;
  YinFlags report_yin;
  LoadFlags report_load;
  report_cmd->add_option("DIR", report_dir, "instrument directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  report_scale.add_to(*report_cmd);
  report_yin.add_to(*report_cmd, "--yin-hop", true);
  report_load.add_to(*report_cmd);
  report_cmd->add_option("--pair-matrix", report_pairs, "write the K x K pair matrix as CSV");
  report_cmd->add_option("-o,--output", report_out, "output JSON path (default stdout)");

  // liftergram
  auto* lg_cmd = app.add_subcommand("liftergram", "liftered log-mel matrix of one file as CSV");
  std::string lg_file, lg_out;
  ScaleFlags lg_flags;
  lg_cmd->add_option("FILE", lg_file, "WAV file")->required()->check(CLI::ExistingFile);
  lg_flags.add_to(*lg_cmd, false);
  lg_cmd->add_option("--m", lg_flags.mfcc, "retained cepstral coefficients")->capture_default_str();
  lg_cmd->add_option("-o,--output", lg_out, "output CSV path (default stdout)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic oracle instrument");
  std::string synth_mode, synth_pitches = "48:72", synth_vels = "25,50,75,100,127", synth_dir;
  SynthProfile profile;
  std::optional<int> synth_id;
  synth_cmd->add_option("--mode", synth_mode, "consistent | inconsistent | detuned")
      ->required()
      ->check(CLI::IsMember({"consistent", "inconsistent", "detuned"}));
  synth_cmd->add_option("--pitches", synth_pitches, "LO:HI or comma list of MIDI notes")
      ->capture_default_str();
  synth_cmd->add_option("--velocities", synth_vels, "comma list of velocities")->capture_default_str();
  synth_cmd->add_option("--seed", profile.seed, "random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_dir, "output directory")->required();
  synth_cmd->add_option("--harmonics", profile.n_harmonics, "harmonics per note (0: all below Nyquist)")->capture_default_str();
  synth_cmd->add_option("--decay", profile.decay_s, "decay time constant (s)")->capture_default_str();
  synth_cmd->add_option("--detune", profile.detune_semitones, "detune in semitones (detuned mode)")
      ->capture_default_str();
  synth_cmd->add_option("--duration", profile.duration_s, "sample duration (s)")->capture_default_str();
  synth_cmd->add_option("--rate", profile.sample_rate, "sample rate (Hz)")->capture_default_str();
  synth_cmd->add_option("--instrument-id", synth_id, "NSynth instrument id (default seed % 1000)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    app.exit(e, err, err);
    return 2;
  }

  try {
    set_thread_count(resolve_thread_count(threads));

    if (tc_cmd->parsed()) {
      const TcConfig cfg = tc_flags.resolve();
      json config;
      config["tc"] = tc_config_json(cfg);
      config["load"] = load_config_json(tc_load);
      if (print_config) {
        out << with_schema(config).dump(2) << "\n";
        return 0;
      }
      const Instrument inst = load(tc_dir, tc_load);
      const TcResult res = tc_measure(inst, cfg);
      std::optional<std::string> pair_file;
      if (!tc_pairs.empty()) {
        write_text_file(tc_pairs, tc_pair_matrix_csv(res));
        pair_file = tc_pairs;
      }
      emit(with_schema(tc_result_json(res, cfg, pair_file)).dump(2) + "\n", tc_out, out);
      return 0;
    }

    if (pitch_cmd->parsed()) {
      const YinConfig cfg = pitch_flags.resolve();
      if (print_config) {
        json config;
        config["yin"] = yin_config_json(cfg);
        out << with_schema(config).dump(2) << "\n";
        return 0;
      }
      json body;
      if (fs::is_directory(pitch_in)) {
        const Instrument inst = load(pitch_in, pitch_load);
        body["sample_rate"] = inst.sample_rate();
        body["per_sample"] = json::array();
        for (const auto& s : inst.samples()) {
          body["per_sample"].push_back(entry_json(estimate_sample_pitch(s, cfg)));
        }
      } else {
        const Waveform w = load_wav(pitch_in);
        const auto frames = yin_f0(w.samples, w.sample_rate, cfg);
        const F0 median = median_pitch(frames);
        body["file"] = fs::path(pitch_in).filename().string();
        body["sample_rate"] = w.sample_rate;
        body["f0_hz"] = median ? json(*median) : json(nullptr);
        body["midi_est"] = median ? json(hz_to_midi(*median)) : json(nullptr);
        try {
          const SampleMeta meta = parse_nsynth_name(fs::path(pitch_in).filename().string());
          body["target_pitch"] = meta.pitch;
          body["deviation"] = median ? json(hz_to_midi(*median) - meta.pitch) : json(nullptr);
        } catch (const Error&) {
          // Not NSynth-named: no target to compare against.
        }
        body["frames"] = json::array();
        for (const auto& f : frames) body["frames"].push_back(f ? json(*f) : json(nullptr));
      }
      emit(with_schema(body).dump(2) + "\n", pitch_out, out);
      return 0;
    }

    if (mad_cmd->parsed()) {
      const YinConfig cfg = mad_flags.resolve();
      if (print_config) {
        json config;
        config["yin"] = yin_config_json(cfg);
        config["mad_mode"] = to_string(mad_flags.mad_mode());
        config["load"] = load_config_json(mad_load);
        out << with_schema(config).dump(2) << "\n";
        return 0;
      }
      const Instrument inst = load(mad_dir, mad_load);
      const PitchReport rep = mad_report(inst, cfg, mad_flags.mad_mode());
      emit(with_schema(pitch_report_json(rep)).dump(2) + "\n", mad_out, out);
      return 0;
    }

    if (report_cmd->parsed()) {
      const TcConfig tcfg = report_scale.resolve();
      const YinConfig ycfg = report_yin.resolve();
      json config;
      config["tc"] = tc_config_json(tcfg);
      config["yin"] = yin_config_json(ycfg);
      config["mad_mode"] = to_string(report_yin.mad_mode());
      config["load"] = load_config_json(report_load);
      if (print_config) {
        out << with_schema(config).dump(2) << "\n";
        return 0;
      }
      const Instrument inst = load(report_dir, report_load);
      const TcResult res = tc_measure(inst, tcfg);
      const PitchReport rep = mad_report(inst, ycfg, report_yin.mad_mode());
      std::optional<std::string> pair_file;
      if (!report_pairs.empty()) {
        write_text_file(report_pairs, tc_pair_matrix_csv(res));
        pair_file = report_pairs;
      }
      json body;
      body["tool"] = kToolName;
      body["version"] = kVersion;
      body["instrument"] = inst.name();
      body["sample_rate"] = inst.sample_rate();
      body["length"] = inst.length();
      body["config"] = config;
      const json tc_part = tc_result_json(res, tcfg, pair_file);
      const json mad_part = pitch_report_json(rep);
      for (const auto& [k, v] : tc_part.items()) body[k] = v;
      for (const auto& [k, v] : mad_part.items()) body[k] = v;
      emit(with_schema(body).dump(2) + "\n", report_out, out);
      return 0;
    }

    if (lg_cmd->parsed()) {
      ScaleConfig cfg = lg_flags.base();
      cfg.validate();
      if (print_config) {
        json config;
        config["scale"] = scale_json(cfg);
        config["exclude_dc"] = lg_flags.exclude_dc;
        out << with_schema(config).dump(2) << "\n";
        return 0;
      }
      const Waveform w = load_wav(lg_file);
      const FeatureExtractor fx(cfg, w.sample_rate, lg_flags.exclude_dc);
      LifteredFeature feat;
      try {
        feat = fx.compute(w.samples);
      } catch (const Error& e) {
        throw Error(e.code(), e.what(), lg_file);
      }
      emit(liftergram_csv(feat, cfg, w.sample_rate), lg_out, out);
      return 0;
    }

    if (synth_cmd->parsed()) {
      profile.mode = parse_synth_mode(synth_mode);
      profile.pitch_set = parse_int_list(synth_pitches, "pitch");
      profile.velocity_set = parse_int_list(synth_vels, "velocity");
      profile.instrument_id = synth_id ? *synth_id : static_cast<int>(profile.seed % 1000);
      profile.validate();
      if (print_config) {
        json config;
        config["mode"] = to_string(profile.mode);
        config["pitches"] = profile.pitch_set;
        config["velocities"] = profile.velocity_set;
        config["seed"] = profile.seed;
        config["harmonics"] = profile.n_harmonics;
        config["decay"] = profile.decay_s;
        config["detune"] = profile.detune_semitones;
        config["duration"] = profile.duration_s;
        config["rate"] = profile.sample_rate;
        config["instrument_id"] = profile.instrument_id;
        out << with_schema(config).dump(2) << "\n";
        return 0;
      }
      const Instrument inst = synth_instrument(profile);
      write_instrument(inst, synth_dir);
      json body;
      body["out"] = synth_dir;
      body["K"] = inst.size();
      body["sample_rate"] = inst.sample_rate();
      body["length"] = inst.length();
      out << with_schema(body).dump(2) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    err << error_json(e).dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    json j;
    j["schema"] = kSchemaVersion;
    j["error"] = "Internal";
    j["message"] = e.what();
    err << j.dump() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace ieval::cli
