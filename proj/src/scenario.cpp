#include "psz/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "psz/error.hpp"
#include "raw_io.hpp"

namespace psz {

const char* to_string(Variant variant) {
  switch (variant) {
    case Variant::centralized: return "centralized";
    case Variant::distributed_full: return "distributed-full";
    case Variant::distributed_efficient: return "distributed-efficient";
  }
  return "unknown";
}

Variant parse_variant(const std::string& text) {
  if (text == "centralized") return Variant::centralized;
  if (text == "distributed-full") return Variant::distributed_full;
  if (text == "distributed-efficient") return Variant::distributed_efficient;
  throw_error(ErrorCategory::config, "unknown variant '" + text + "'");
}

Topology TopologySpec::build(std::size_t nodes) const {
  if (kind == "ring") return ring(nodes, alpha);
  if (kind == "full") return full(nodes, alpha);
  if (kind == "line") return line(nodes, alpha);
  if (kind == "edges") return Topology::from_edges(nodes, edges, alpha);
  throw_error(ErrorCategory::config, "unknown topology kind '" + kind + "'");
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::uint64_t parse_uint(const std::string& text, const std::string& key) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw_error(ErrorCategory::config, "invalid integer '" + text + "' for " + key);
  }
  return value;
}

std::size_t parse_size(const std::string& text, const std::string& key) {
  return static_cast<std::size_t>(parse_uint(text, key));
}

double parse_real(const std::string& text, const std::string& key) {
  const double v = parse_double(text, key);
  require(std::isfinite(v), ErrorCategory::config, key + " must be finite");
  return v;
}

std::vector<std::pair<std::size_t, std::size_t>> parse_edges(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto dash = item.find('-');
    require(dash != std::string::npos, ErrorCategory::config,
            "edge '" + item + "' must look like a-b");
    edges.emplace_back(parse_size(trim(item.substr(0, dash)), "topology.edges"),
                       parse_size(trim(item.substr(dash + 1)), "topology.edges"));
  }
  return edges;
}

std::string format_edges(const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::string out;
  for (const auto& [a, b] : edges) {
    if (!out.empty()) out += ",";
    out += std::to_string(a) + "-" + std::to_string(b);
  }
  return out;
}

struct Field {
  std::function<void(Scenario&, const std::string&)> set;
  std::function<std::string(const Scenario&)> get;
};

Field size_field(std::size_t Scenario::*member) {
  return {[member](Scenario& s, const std::string& v) { s.*member = parse_size(v, "value"); },
          [member](const Scenario& s) { return std::to_string(s.*member); }};
}

Field real_field(double Scenario::*member) {
  return {[member](Scenario& s, const std::string& v) { s.*member = parse_real(v, "value"); },
          [member](const Scenario& s) { return format_double(s.*member); }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = {
      {"variant",
       {[](Scenario& s, const std::string& v) { s.variant = parse_variant(v); },
        [](const Scenario& s) { return std::string(to_string(s.variant)); }}},
      {"L", size_field(&Scenario::loudspeakers)},
      {"M", size_field(&Scenario::microphones)},
      {"K", size_field(&Scenario::control_taps)},
      {"J", size_field(&Scenario::plant_taps)},
      {"sample_rate", real_field(&Scenario::sample_rate)},
      {"duration", real_field(&Scenario::duration)},
      {"seed",
       {[](Scenario& s, const std::string& v) { s.seed = parse_uint(v, "seed"); },
        [](const Scenario& s) { return std::to_string(s.seed); }}},
      {"algo.kappa", real_field(&Scenario::kappa)},
      {"algo.mu", real_field(&Scenario::mu)},
      {"target.source",
       {[](Scenario& s, const std::string& v) { s.target.source = parse_size(v, "target.source"); },
        [](const Scenario& s) { return std::to_string(s.target.source); }}},
      {"target.delay",
       {[](Scenario& s, const std::string& v) { s.target.delay = parse_size(v, "target.delay"); },
        [](const Scenario& s) { return std::to_string(s.target.delay); }}},
      {"topology.kind",
       {[](Scenario& s, const std::string& v) { s.topology.kind = v; },
        [](const Scenario& s) { return s.topology.kind; }}},
      {"topology.edges",
       {[](Scenario& s, const std::string& v) { s.topology.edges = parse_edges(v); },
        [](const Scenario& s) { return format_edges(s.topology.edges); }}},
      {"topology.alpha",
       {[](Scenario& s, const std::string& v) { s.topology.alpha = parse_alpha_policy(v); },
        [](const Scenario& s) { return std::string(to_string(s.topology.alpha)); }}},
      {"plants.source",
       {[](Scenario& s, const std::string& v) { s.plants.kind = v; },
        [](const Scenario& s) { return s.plants.kind; }}},
      {"plants.path",
       {[](Scenario& s, const std::string& v) { s.plants.path = v; },
        [](const Scenario& s) { return s.plants.path.string(); }}},
      {"plants.estimate_error_db",
       {[](Scenario& s, const std::string& v) {
          if (v == "none") {
            s.plants.estimate_error_db.reset();
          } else {
            s.plants.estimate_error_db = parse_real(v, "plants.estimate_error_db");
          }
        },
        [](const Scenario& s) {
          return s.plants.estimate_error_db ? format_double(*s.plants.estimate_error_db)
                                            : std::string("none");
        }}},
      {"synth.delay_min",
       {[](Scenario& s, const std::string& v) { s.plants.synth.delay_min = parse_size(v, "synth.delay_min"); },
        [](const Scenario& s) { return std::to_string(s.plants.synth.delay_min); }}},
      {"synth.delay_max",
       {[](Scenario& s, const std::string& v) { s.plants.synth.delay_max = parse_size(v, "synth.delay_max"); },
        [](const Scenario& s) { return std::to_string(s.plants.synth.delay_max); }}},
      {"synth.decay_rate",
       {[](Scenario& s, const std::string& v) { s.plants.synth.decay_rate = parse_real(v, "synth.decay_rate"); },
        [](const Scenario& s) { return format_double(s.plants.synth.decay_rate); }}},
      {"synth.tail_scale",
       {[](Scenario& s, const std::string& v) { s.plants.synth.tail_scale = parse_real(v, "synth.tail_scale"); },
        [](const Scenario& s) { return format_double(s.plants.synth.tail_scale); }}},
      {"synth.gain",
       {[](Scenario& s, const std::string& v) { s.plants.synth.gain = parse_real(v, "synth.gain"); },
        [](const Scenario& s) { return format_double(s.plants.synth.gain); }}},
      {"synth.dark_attenuation",
       {[](Scenario& s, const std::string& v) {
          s.plants.synth.dark_attenuation = parse_real(v, "synth.dark_attenuation");
        },
        [](const Scenario& s) { return format_double(s.plants.synth.dark_attenuation); }}},
      {"synth.coupling",
       {[](Scenario& s, const std::string& v) { s.plants.synth.coupling = parse_real(v, "synth.coupling"); },
        [](const Scenario& s) { return format_double(s.plants.synth.coupling); }}},
      {"synth.seed",
       {[](Scenario& s, const std::string& v) { s.plants.synth.seed = parse_uint(v, "synth.seed"); },
        [](const Scenario& s) { return std::to_string(s.plants.synth.seed); }}},
      {"noise.band_low",
       {[](Scenario& s, const std::string& v) { s.noise.band_low = parse_real(v, "noise.band_low"); },
        [](const Scenario& s) { return format_double(s.noise.band_low); }}},
      {"noise.band_high",
       {[](Scenario& s, const std::string& v) { s.noise.band_high = parse_real(v, "noise.band_high"); },
        [](const Scenario& s) { return format_double(s.noise.band_high); }}},
      {"noise.order",
       {[](Scenario& s, const std::string& v) { s.noise.filter_order = parse_size(v, "noise.order"); },
        [](const Scenario& s) { return std::to_string(s.noise.filter_order); }}},
      {"noise.seed",
       {[](Scenario& s, const std::string& v) { s.noise.seed = parse_uint(v, "noise.seed"); },
        [](const Scenario& s) { return std::to_string(s.noise.seed); }}},
      {"metrics.window", size_field(&Scenario::metric_window)},
      {"run.reference",
       {[](Scenario& s, const std::string& v) { s.reference_mode = parse_reference_mode(v); },
        [](const Scenario& s) { return std::string(to_string(s.reference_mode)); }}},
      {"run.threads", size_field(&Scenario::threads)},
  };
  return table;
}

std::string canonical_key(const std::string& key) {
  if (key == "kappa") return "algo.kappa";
  if (key == "mu") return "algo.mu";
  return key;
}

}  // namespace

void apply_setting(Scenario& scenario, const std::string& key, const std::string& value) {
  const auto& table = fields();
  auto it = table.find(canonical_key(key));
  if (it == table.end()) throw_error(ErrorCategory::config, "unknown config key '" + key + "'");
  try {
    it->second.set(scenario, value);
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::config) throw;
    throw_error(ErrorCategory::config, "bad value for " + it->first + ": " + e.what());
  }
}

Scenario parse_scenario(std::string_view text) { return parse_scenario(text, Scenario{}); }

Scenario parse_scenario(std::string_view text, Scenario base) {
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const auto raw = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCategory::config,
            "line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = canonical_key(trim(line.substr(0, eq)));
    require(seen.insert(key).second, ErrorCategory::config,
            "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    apply_setting(base, key, trim(line.substr(eq + 1)));
  }
  return base;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string normalize(const Scenario& scenario) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + "=" + field.get(scenario) + "\n";
  return out;
}

void Scenario::validate() const {
  require(loudspeakers >= 1 && microphones >= 1, ErrorCategory::config, "L and M must be >= 1");
  require(control_taps >= 1 && plant_taps >= 1, ErrorCategory::config, "K and J must be >= 1");
  require(sample_rate > 0.0, ErrorCategory::config, "sample_rate must be positive");
  require(duration >= 0.0, ErrorCategory::config, "duration must be >= 0");
  require(kappa > 0.0 && kappa < 1.0, ErrorCategory::config,
          "algo.kappa must lie strictly between 0 and 1");
  require(mu > 0.0, ErrorCategory::config, "algo.mu must be positive");
  require(target.source < loudspeakers, ErrorCategory::config,
          "target.source must index a loudspeaker");
  require(metric_window >= 1, ErrorCategory::config, "metrics.window must be >= 1");
  require(threads >= 1, ErrorCategory::config, "run.threads must be >= 1");
  if (variant != Variant::centralized) {
    require(microphones == loudspeakers, ErrorCategory::config,
            "distributed variants need M = L (one microphone per zone per node)");
    topology.build(loudspeakers);
  }
  if (plants.kind == "synth") {
    SynthRirSpec synth = plants.synth;
    synth.taps = plant_taps;
    synth.validate();
  } else {
    require(plants.kind == "files", ErrorCategory::config,
            "plants.source must be synth or files");
    require(!plants.path.empty(), ErrorCategory::config, "plants.path is required for files");
  }
  NoiseSpec n = noise;
  n.sample_rate = sample_rate;
  n.validate();
}

std::size_t Scenario::iterations() const {
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

Scenario PaperPreset::for_variant(Variant variant, double kappa) const {
  Scenario s = scenario;
  s.variant = variant;
  s.kappa = kappa;
  s.mu = variant == Variant::distributed_efficient ? mu_efficient : mu_centralized;
  return s;
}

PaperPreset paper_preset() {
  PaperPreset preset;
  Scenario& s = preset.scenario;
  s.variant = Variant::distributed_efficient;
  s.loudspeakers = 8;
  s.microphones = 8;
  s.control_taps = 128;
  s.plant_taps = 128;
  s.sample_rate = 4000.0;
  s.duration = 60.0;
  s.kappa = 0.5;
  s.mu = preset.mu_efficient;
  s.target = TargetSpec{0, 64};
  s.topology = TopologySpec{"ring", {}, AlphaPolicy::normalized};
  s.noise.band_low = 100.0;
  s.noise.band_high = 1000.0;
  s.noise.filter_order = 255;
  s.plants.kind = "synth";
  s.reference_mode = ReferenceMode::recursive;
  return preset;
}

RunResult run(const Scenario& scenario,
              std::function<void(std::size_t, const ControlFilterBank&)> observer) {
  scenario.validate();
  RunResult result{SimulationResult{{}, {}, ControlFilterBank(1, 1)}, normalize(scenario), {}};

  std::optional<PlantSet> plants;
  if (scenario.plants.kind == "synth") {
    SynthRirSpec synth = scenario.plants.synth;
    synth.taps = scenario.plant_taps;
    plants = synth_plant_set(synth, scenario.loudspeakers, scenario.microphones,
                             scenario.sample_rate);
  } else {
    plants = load_plant_set(scenario.plants.path, scenario.loudspeakers, scenario.microphones,
                            scenario.plant_taps, &result.warnings);
    require(plants->sample_rate() == 0.0 || plants->sample_rate() == scenario.sample_rate,
            ErrorCategory::config, "plant files were recorded at a different sample rate");
    *plants = [&] {
      PlantSet p(scenario.loudspeakers, scenario.microphones, scenario.plant_taps,
                 scenario.sample_rate);
      for (Zone z : {Zone::bright, Zone::dark}) {
        for (std::size_t m = 0; m < scenario.microphones; ++m) {
          for (std::size_t l = 0; l < scenario.loudspeakers; ++l) {
            auto src = plants->response(z, m, l);
            std::copy(src.begin(), src.end(), p.response(z, m, l).begin());
          }
        }
      }
      return p;
    }();
  }

  PlantEstimate estimate =
      scenario.plants.estimate_error_db
          ? perturb_estimate(*plants, *scenario.plants.estimate_error_db, scenario.seed)
          : *plants;

  NoiseSpec noise = scenario.noise;
  noise.sample_rate = scenario.sample_rate;

  SimulationSetup setup{*plants,
                        std::move(estimate),
                        bandlimited_noise(noise, scenario.iterations()),
                        scenario.control_taps,
                        AlgoParams{scenario.kappa, scenario.mu},
                        scenario.target,
                        scenario.metric_window,
                        scenario.reference_mode,
                        scenario.threads,
                        RunInfo{to_string(scenario.variant), scenario.kappa, scenario.mu,
                                scenario.seed},
                        std::move(observer)};

  switch (scenario.variant) {
    case Variant::centralized:
      result.simulation = run_centralized(setup);
      break;
    case Variant::distributed_full:
      result.simulation =
          run_distributed(DiffusionVariant::full, scenario.topology.build(scenario.loudspeakers), setup);
      break;
    case Variant::distributed_efficient:
      result.simulation = run_distributed(DiffusionVariant::efficient,
                                          scenario.topology.build(scenario.loudspeakers), setup);
      break;
  }
  return result;
}

std::string curve_csv(const LearningCurve& curve) {
  std::string out = "iter,time_s,mse_db,ac_db\n";
  for (const auto& p : curve.points) {
    out += std::to_string(p.iteration) + "," + format_double(p.time_s) + "," +
           format_double(p.mse_db) + "," + format_double(p.ac_db) + "\n";
  }
  return out;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCategory::io, "cannot open " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCategory::io, "write failed for " + path.string());
}

}  // namespace

void emit(const RunResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  require(!ec, ErrorCategory::io, "cannot create " + out_dir.string() + ": " + ec.message());
  write_text(out_dir / "curve.csv", curve_csv(result.simulation.curve));
  write_text(out_dir / "complexity.txt", to_text(result.simulation.complexity));
  write_f64_file(out_dir / "filters.f64", result.simulation.filters.stacked());
  write_text(out_dir / "scenario.norm", result.scenario_echo);
}

}  // namespace psz
