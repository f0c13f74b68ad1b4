#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wlelm/harness.hpp"

namespace wlelm {

std::string_view to_string(ReceiverKind k) {
  switch (k) {
    case ReceiverKind::kLs: return "LS";
    case ReceiverKind::kMmse: return "MMSE";
    case ReceiverKind::kElm: return "ELM";
    case ReceiverKind::kCelm: return "CELM";
    case ReceiverKind::kCelmah: return "CELMAH";
    case ReceiverKind::kCelmWlls: return "CELM_WLLS";
  }
  return "?";
}

std::optional<ReceiverKind> parse_receiver_kind(std::string_view name) {
  for (auto k : {ReceiverKind::kLs, ReceiverKind::kMmse, ReceiverKind::kElm, ReceiverKind::kCelm,
                 ReceiverKind::kCelmah, ReceiverKind::kCelmWlls}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

bool is_learned(ReceiverKind k) { return k != ReceiverKind::kLs && k != ReceiverKind::kMmse; }

NetworkVariant network_variant(ReceiverKind k) {
  switch (k) {
    case ReceiverKind::kElm: return NetworkVariant::kElm;
    case ReceiverKind::kCelm: return NetworkVariant::kCelm;
    case ReceiverKind::kCelmah: return NetworkVariant::kCelmah;
    case ReceiverKind::kCelmWlls: return NetworkVariant::kCelmWlls;
    default: throw ContractViolation(std::string(to_string(k)) + " is not a learned receiver");
  }
}

std::string case_name(ChannelCase c) { return "case" + std::to_string(static_cast<int>(c)); }

std::optional<ChannelCase> parse_case(std::string_view name) {
  for (int i = 1; i <= 4; ++i) {
    const auto c = static_cast<ChannelCase>(i);
    if (case_name(c) == name) return c;
  }
  return std::nullopt;
}

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::kSnrDb: return "snr_db";
    case SweepVariable::kDelaySpreadNs: return "delay_spread_ns";
    case SweepVariable::kEtaPhi: return "eta_phi";
    case SweepVariable::kDopplerHz: return "doppler_hz";
    case SweepVariable::kIboDb: return "ibo_db";
  }
  return "?";
}

std::optional<SweepVariable> parse_sweep_variable(std::string_view name) {
  for (auto v : {SweepVariable::kSnrDb, SweepVariable::kDelaySpreadNs, SweepVariable::kEtaPhi,
                 SweepVariable::kDopplerHz, SweepVariable::kIboDb}) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

std::string ReceiverSpec::label() const { return name.empty() ? std::string(to_string(kind)) : name; }

void ExperimentConfig::validate() const {
  ofdm.validate();
  QamConstellation::make(qam_order);
  if (data_symbols < 1) throw InputError("data_symbols must be >= 1");
  if (receivers.empty()) throw InputError("no receivers configured");
  if (sweep_values.empty()) throw InputError("sweep value list is empty");
  if (!std::is_sorted(sweep_values.begin(), sweep_values.end())) {
    throw InputError("sweep values must be sorted ascending");
  }
  if (n_frames < 1) throw InputError("n_frames must be >= 1");
  std::set<std::pair<std::string, int>> seen;
  for (const auto& r : receivers) {
    const int c = is_learned(r.kind) ? 1 : static_cast<int>(r.channel_case);
    if (!seen.emplace(r.label(), c).second) {
      throw InputError("duplicate receiver '" + r.label() + "' for " + case_name(static_cast<ChannelCase>(c)));
    }
    if (is_learned(r.kind)) {
      if (r.hidden_nodes < 1) throw InputError("hidden_nodes must be >= 1");
      if (r.taps < 1) throw InputError("taps must be >= 1");
      if (r.taps - 1 > ofdm.n_cp) throw InputError("taps - 1 must not exceed the cyclic prefix");
      if (!(r.init_variance > 0.0)) throw InputError("init_variance must be positive");
      if (!(r.ridge >= 0.0)) throw InputError("ridge must be >= 0");
    }
  }
  channel_at(sweep_values.front()).validate();
}

ImpairmentConfig ExperimentConfig::channel_at(double sweep_value) const {
  ImpairmentConfig c = channel;
  double spread = delay_spread_ns;
  c.snr_db = fixed_snr_db;
  switch (sweep_variable) {
    case SweepVariable::kSnrDb: c.snr_db = sweep_value; break;
    case SweepVariable::kDelaySpreadNs: spread = sweep_value; break;
    case SweepVariable::kEtaPhi: c.eta_phi = sweep_value; break;
    case SweepVariable::kDopplerHz: c.doppler_hz = sweep_value; break;
    case SweepVariable::kIboDb: c.hpa.ibo_db = sweep_value; break;
  }
  const TdlProfile shape = make_tdl_profile(spread, ofdm.sample_rate_hz());
  c.tdl.taps = shape.taps;
  return c;
}

ExperimentConfig default_experiment() {
  ExperimentConfig cfg;
  const auto spec = [](ReceiverKind k) {
    ReceiverSpec r;
    r.kind = k;
    return r;
  };
  cfg.receivers = {spec(ReceiverKind::kLs),   spec(ReceiverKind::kMmse),   spec(ReceiverKind::kElm),
                   spec(ReceiverKind::kCelm), spec(ReceiverKind::kCelmah), spec(ReceiverKind::kCelmWlls)};
  cfg.sweep_values = {0, 2, 4, 6, 8, 10, 12, 14};
  return cfg;
}

namespace {

using nlohmann::json;

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end()) out = it->get<T>();
}

ChannelCase read_case(const json& j) {
  const auto name = j.get<std::string>();
  const auto c = parse_case(name);
  if (!c) throw InputError("unknown case '" + name + "' (expected case1..case4)");
  return *c;
}

void read_hpa(const json& j, HpaModel& hpa) {
  std::string model = "saleh";
  read_opt(j, "model", model);
  if (model == "table") {
    const auto file = j.at("table_file").get<std::string>();
    const double ibo = hpa.ibo_db;
    hpa = load_hpa_table(file);
    hpa.ibo_db = ibo;
  } else if (model != "saleh") {
    throw InputError("unknown HPA model '" + model + "'");
  }
  read_opt(j, "alpha_a", hpa.alpha_a);
  read_opt(j, "beta_a", hpa.beta_a);
  read_opt(j, "alpha_phi", hpa.alpha_phi);
  read_opt(j, "beta_phi", hpa.beta_phi);
  read_opt(j, "ibo_db", hpa.ibo_db);
}

void read_channel(const json& j, ExperimentConfig& cfg) {
  auto& ch = cfg.channel;
  if (const auto it = j.find("hpa"); it != j.end()) read_hpa(*it, ch.hpa);
  read_opt(j, "hpa_enabled", ch.hpa_enabled);
  if (const auto it = j.find("tdl"); it != j.end()) {
    read_opt(*it, "enabled", ch.tdl_enabled);
    read_opt(*it, "fading", ch.tdl_fading);
    read_opt(*it, "delay_spread_ns", cfg.delay_spread_ns);
    read_opt(*it, "carrier_offset_phase", ch.tdl.carrier_offset_phase);
    read_opt(*it, "carrier_freq_hz", ch.tdl.carrier_freq_hz);
  }
  read_opt(j, "doppler_hz", ch.doppler_hz);
  read_opt(j, "residual_offset_hz", ch.residual_offset_hz);
  read_opt(j, "offset_enabled", ch.offset_enabled);
  if (const auto it = j.find("phase_noise"); it != j.end()) {
    read_opt(*it, "enabled", ch.phase_noise_enabled);
    if (const auto m = it->find("mask"); m != it->end()) {
      ch.phase_noise.clear();
      for (const auto& point : *m) ch.phase_noise.emplace_back(point.at(0).get<double>(), point.at(1).get<double>());
    }
  }
  read_opt(j, "eta_a", ch.eta_a);
  read_opt(j, "eta_phi", ch.eta_phi);
  read_opt(j, "iq_enabled", ch.iq_enabled);
}

ReceiverSpec read_receiver(const json& j, ChannelCase default_case) {
  ReceiverSpec r;
  const auto kind_name = j.at("kind").get<std::string>();
  const auto kind = parse_receiver_kind(kind_name);
  if (!kind) throw InputError("unknown receiver kind '" + kind_name + "'");
  r.kind = *kind;
  r.channel_case = default_case;
  if (const auto it = j.find("case"); it != j.end()) r.channel_case = read_case(*it);
  read_opt(j, "hidden_nodes", r.hidden_nodes);
  read_opt(j, "init_variance", r.init_variance);
  read_opt(j, "taps", r.taps);
  read_opt(j, "ridge", r.ridge);
  read_opt(j, "name", r.name);
  return r;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.receivers.clear();
  try {
    if (const auto it = j.find("waveform"); it != j.end()) {
      read_opt(*it, "n_fft", cfg.ofdm.n_fft);
      read_opt(*it, "subcarrier_spacing_hz", cfg.ofdm.subcarrier_spacing_hz);
      read_opt(*it, "n_cp", cfg.ofdm.n_cp);
      cfg.ofdm.n_occupied = cfg.ofdm.n_fft;
      read_opt(*it, "n_occupied", cfg.ofdm.n_occupied);
      read_opt(*it, "qam_order", cfg.qam_order);
      read_opt(*it, "data_symbols", cfg.data_symbols);
    }
    if (const auto it = j.find("channel"); it != j.end()) read_channel(*it, cfg);
    if (const auto it = j.find("case_id"); it != j.end()) cfg.case_id = read_case(*it);
    for (const auto& r : j.at("receivers")) cfg.receivers.push_back(read_receiver(r, cfg.case_id));
    const auto& sweep = j.at("sweep");
    const auto var_name = sweep.at("variable").get<std::string>();
    const auto var = parse_sweep_variable(var_name);
    if (!var) throw InputError("unknown sweep variable '" + var_name + "'");
    cfg.sweep_variable = *var;
    cfg.sweep_values = sweep.at("values").get<std::vector<double>>();
    read_opt(j, "fixed_snr_db", cfg.fixed_snr_db);
    read_opt(j, "n_frames", cfg.n_frames);
    read_opt(j, "master_seed", cfg.master_seed);
    read_opt(j, "channel_estimate_window", cfg.channel_estimate_window);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

DopplerParams parse_orbit_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("orbit config is not valid JSON: ") + e.what());
  }
  DopplerParams p;
  try {
    double altitude = p.r_o - p.r_e;
    double velocity = p.w_s * p.r_o;
    read_opt(j, "f_c", p.f_c);
    read_opt(j, "earth_radius_m", p.r_e);
    read_opt(j, "altitude_m", altitude);
    read_opt(j, "velocity_mps", velocity);
    read_opt(j, "theta_max", p.theta_max);
    p.r_o = p.r_e + altitude;
    p.w_s = velocity / p.r_o;
    std::string form = "standard";
    read_opt(j, "eta_form", form);
    if (form == "standard") {
      p.eta_form = DopplerParams::EtaForm::kStandard;
    } else if (form == "as_printed") {
      p.eta_form = DopplerParams::EtaForm::kAsPrinted;
    } else {
      throw InputError("unknown eta_form '" + form + "' (expected standard or as_printed)");
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("orbit config: ") + e.what());
  }
  p.validate();
  return p;
}

DopplerParams load_orbit_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open orbit config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_orbit_config(text.str());
}

}  // namespace wlelm
