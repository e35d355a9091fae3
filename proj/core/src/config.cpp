/*
 Copyright 2026 The uplinksched Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "uplink/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "uplink/errors.hpp"

namespace uplink {

namespace {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::vector<Entry> entries;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string_view strip_comment(std::string_view line) {
  // '#' or ';' start a comment at the beginning of a line or after whitespace.
  for (std::size_t i = 0; i < line.size(); ++i) {
    if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::vector<Section> split_sections(std::string_view text) {
  std::vector<Section> sections;
  std::set<std::string> seen_sections;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "", "unterminated section header");
      std::string name(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) throw ConfigError(line_no, "", "empty section name");
      if (!seen_sections.insert(name).second) {
        throw ConfigError(line_no, name, "section appears twice");
      }
      sections.push_back({std::move(name), line_no, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    if (sections.empty()) throw ConfigError(line_no, "", "key outside of any section");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(line_no, sections.back().name, "empty key");
    for (const auto& e : sections.back().entries) {
      if (e.key == key) {
        throw ConfigError(line_no, sections.back().name + "." + key, "key appears twice");
      }
    }
    sections.back().entries.push_back({std::move(key), std::move(value), line_no});
  }
  return sections;
}

class Reader {
 public:
  Reader(const Section& s) : section_(s) {}

  const Entry* find(std::string_view key) {
    for (const auto& e : section_.entries) {
      if (e.key == key) {
        used_.insert(e.key);
        return &e;
      }
    }
    return nullptr;
  }

  std::string field(const Entry& e) const { return section_.name + "." + e.key; }

  void read(std::string_view key, double& out) {
    if (const Entry* e = find(key)) out = to_double(*e, e->value);
  }

  void read(std::string_view key, int& out) {
    if (const Entry* e = find(key)) out = to_int<int>(*e, e->value);
  }

  void read(std::string_view key, std::int64_t& out) {
    if (const Entry* e = find(key)) out = to_int<std::int64_t>(*e, e->value);
  }

  void read(std::string_view key, std::uint64_t& out) {
    if (const Entry* e = find(key)) out = to_int<std::uint64_t>(*e, e->value);
  }

  void read(std::string_view key, bool& out) {
    if (const Entry* e = find(key)) {
      if (e->value == "true") {
        out = true;
      } else if (e->value == "false") {
        out = false;
      } else {
        throw ConfigError(e->line, field(*e), "expected true or false, got '" + e->value + "'");
      }
    }
  }

  void read(std::string_view key, std::string& out) {
    if (const Entry* e = find(key)) out = e->value;
  }

  void read(std::string_view key, std::vector<double>& out) {
    if (const Entry* e = find(key)) out = doubles(*e);
  }

  std::vector<double> doubles(const Entry& e) const {
    std::vector<double> out;
    for (const auto& item : items(e)) out.push_back(to_double(e, item));
    return out;
  }

  std::vector<int> ints(const Entry& e) const {
    std::vector<int> out;
    for (const auto& item : items(e)) out.push_back(to_int<int>(e, item));
    return out;
  }

  std::vector<std::string> items(const Entry& e) const {
    std::vector<std::string> out;
    std::string_view rest = e.value;
    if (trim(rest).empty()) return out;
    while (true) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      if (item.empty()) throw ConfigError(e.line, field(e), "empty list item");
      out.emplace_back(item);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  // Every key must have been consumed.
  void finish() const {
    for (const auto& e : section_.entries) {
      if (!used_.count(e.key)) throw ConfigError(e.line, field(e), "unknown key");
    }
  }

 private:
  double to_double(const Entry& e, std::string_view text) const {
    double v = 0.0;
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
      throw ConfigError(e.line, field(e), "expected a number, got '" + std::string(text) + "'");
    }
    return v;
  }

  template <typename T>
  T to_int(const Entry& e, std::string_view text) const {
    T v{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
      throw ConfigError(e.line, field(e),
                        "expected an integer, got '" + std::string(text) + "'");
    }
    return v;
  }

  const Section& section_;
  std::set<std::string> used_;
};

void read_learner(Reader& r, LearnerSettings& out) {
  r.read("f_exponent", out.steps.f_exponent);
  r.read("e_exponent", out.steps.e_exponent);
  r.read("f_scale", out.steps.f_scale);
  r.read("e_scale", out.steps.e_scale);
  r.read("lambda_max", out.lambda_max);
  r.read("monotone_values", out.monotone_values);
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt(values[i]);
  }
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

void write_learner(std::ostringstream& os, const LearnerSettings& s) {
  os << "f_exponent = " << fmt(s.steps.f_exponent) << '\n'
     << "e_exponent = " << fmt(s.steps.e_exponent) << '\n'
     << "f_scale = " << fmt(s.steps.f_scale) << '\n'
     << "e_scale = " << fmt(s.steps.e_scale) << '\n'
     << "lambda_max = " << fmt(s.lambda_max) << '\n'
     << "monotone_values = " << fmt_bool(s.monotone_values) << '\n';
}

ConfigError invalid(const std::string& field, const std::string& what) {
  return ConfigError(0, field, what);
}

}  // namespace

std::string_view to_string(SchedulerKind kind) {
  switch (kind) {
    case SchedulerKind::kAuction:
      return "auction";
    case SchedulerKind::kJointOptimal:
      return "joint-optimal";
    case SchedulerKind::kMlwdf:
      return "mlwdf";
  }
  return "?";
}

std::optional<SchedulerKind> scheduler_from_string(std::string_view name) {
  if (name == "auction") return SchedulerKind::kAuction;
  if (name == "joint-optimal") return SchedulerKind::kJointOptimal;
  if (name == "mlwdf") return SchedulerKind::kMlwdf;
  return std::nullopt;
}

std::string_view to_string(SweepField field) {
  switch (field) {
    case SweepField::kDelayMs:
      return "delay_ms";
    case SweepField::kAlphaDb:
      return "alpha_db";
    case SweepField::kPacketsPerFrame:
      return "packets_per_frame";
    case SweepField::kPeakPower:
      return "peak_power";
  }
  return "?";
}

std::optional<SweepField> sweep_field_from_string(std::string_view name) {
  for (SweepField f : {SweepField::kDelayMs, SweepField::kAlphaDb,
                       SweepField::kPacketsPerFrame, SweepField::kPeakPower}) {
    if (to_string(f) == name) return f;
  }
  return std::nullopt;
}

int ScenarioConfig::num_users() const {
  int n = 0;
  for (const auto& g : groups) n += g.users;
  return n;
}

ChannelBinning ScenarioConfig::binning() const {
  if (channel_boundaries_db.empty() && channel_levels_db.empty()) {
    return ChannelBinning::eight_level();
  }
  return ChannelBinning::from_db(channel_boundaries_db, channel_levels_db);
}

TrafficModel ScenarioConfig::traffic(const UserGroup& group) const {
  TrafficModel t;
  t.mean_packets_per_frame = group.packets_per_frame;
  t.pareto_shape = pareto_shape;
  t.pareto_mode_bits = pareto_mode_bits;
  t.pareto_cutoff_bits = pareto_cutoff_bits;
  t.fragment_bits = power.fragment_bits;
  return t;
}

void ScenarioConfig::validate() const {
  if (schedulers.empty()) throw invalid("scenario.schedulers", "need at least one scheduler");
  if (runs < 1) throw invalid("scenario.runs", "need at least one run");
  if (horizon < 1) throw invalid("scenario.horizon", "must be positive");
  if (warmup < 0 || warmup >= horizon) {
    throw invalid("scenario.warmup", "must lie in [0, horizon)");
  }
  if (buffer < 1) throw invalid("system.buffer", "must be positive");
  if (!(frame_ms > 0.0)) throw invalid("system.frame_ms", "must be positive");
  try {
    power.validate();
  } catch (const ContractViolation& e) {
    throw invalid("system", e.what());
  }
  try {
    (void)binning();
  } catch (const ContractViolation& e) {
    throw invalid("system.channel_levels_db", e.what());
  }
  if (groups.empty()) throw invalid("group.1", "need at least one user group");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::string name = "group." + std::to_string(g + 1);
    if (groups[g].users < 1) throw invalid(name + ".users", "must be positive");
    if (!(groups[g].packets_per_frame >= 0.0)) {
      throw invalid(name + ".packets_per_frame", "must be non-negative");
    }
    if (!(groups[g].delay_ms >= 0.0)) throw invalid(name + ".delay_ms", "must be non-negative");
    try {
      traffic(groups[g]).validate();
    } catch (const ContractViolation& e) {
      throw invalid("traffic", e.what());
    }
  }
  for (const auto* s : {&auction, &joint}) {
    const std::string name = s == &auction ? "auction" : "joint";
    try {
      s->steps.validate();
    } catch (const ContractViolation& e) {
      throw invalid(name, e.what());
    }
    if (!(s->lambda_max > 0.0)) throw invalid(name + ".lambda_max", "must be positive");
  }
  if (!gamma.empty() && static_cast<int>(gamma.size()) != num_users()) {
    throw invalid("joint.gamma", "need one weight per user");
  }
  if (!(cell_budget > 0.0)) throw invalid("joint.cell_budget", "must be positive");
  if (sweep) {
    if (sweep->columns.empty()) throw invalid("sweep", "no swept field");
    for (const auto& c : sweep->columns) {
      if (c.values.size() != sweep->points()) {
        throw invalid("sweep." + std::string(to_string(c.field)),
                      "all sweep columns need the same length");
      }
    }
    for (int g : sweep->groups) {
      if (g < 1 || g > static_cast<int>(groups.size())) {
        throw invalid("sweep.groups", "no group " + std::to_string(g));
      }
    }
  }
  if (calibration && calibration->peak_powers.empty()) {
    throw invalid("calibration.peak_powers", "need at least one power");
  }
  if (oracle) {
    if (oracle->buffer < 1) throw invalid("oracle.buffer", "must be positive");
    if (!(oracle->delay_ms >= 0.0)) throw invalid("oracle.delay_ms", "must be non-negative");
    if (!(oracle->failure_prob >= 0.0 && oracle->failure_prob < 1.0)) {
      throw invalid("oracle.failure_prob", "must lie in [0, 1)");
    }
    if (oracle->learner_horizon < 1) throw invalid("oracle.learner_horizon", "must be positive");
    if (oracle->learner_runs < 0) throw invalid("oracle.learner_runs", "must be non-negative");
  }
}

ScenarioConfig parse_scenario(std::string_view text) {
  ScenarioConfig cfg;
  const auto sections = split_sections(text);
  std::map<int, UserGroup> groups;
  std::map<int, int> group_lines;

  for (const auto& s : sections) {
    Reader r(s);
    if (s.name == "scenario") {
      r.read("name", cfg.name);
      if (const Entry* e = r.find("schedulers")) {
        cfg.schedulers.clear();
        for (const auto& item : r.items(*e)) {
          const auto kind = scheduler_from_string(item);
          if (!kind) throw ConfigError(e->line, r.field(*e), "unknown scheduler '" + item + "'");
          cfg.schedulers.push_back(*kind);
        }
      }
      r.read("runs", cfg.runs);
      r.read("seed_base", cfg.seed_base);
      r.read("horizon", cfg.horizon);
      r.read("warmup", cfg.warmup);
    } else if (s.name == "system") {
      r.read("buffer", cfg.buffer);
      r.read("frame_ms", cfg.frame_ms);
      r.read("peak_power", cfg.power.peak_power);
      r.read("noise_bandwidth", cfg.power.n0w);
      r.read("symbols_per_slot", cfg.power.symbols_per_slot);
      r.read("fragment_bits", cfg.power.fragment_bits);
      r.read("max_rate", cfg.power.max_rate_fragments);
      r.read("channel_boundaries_db", cfg.channel_boundaries_db);
      r.read("channel_levels_db", cfg.channel_levels_db);
    } else if (s.name == "traffic") {
      r.read("pareto_shape", cfg.pareto_shape);
      r.read("pareto_mode_bits", cfg.pareto_mode_bits);
      r.read("pareto_cutoff_bits", cfg.pareto_cutoff_bits);
    } else if (s.name.rfind("group.", 0) == 0) {
      int id = 0;
      const std::string_view digits = std::string_view(s.name).substr(6);
      const auto res = std::from_chars(digits.data(), digits.data() + digits.size(), id);
      if (res.ec != std::errc() || res.ptr != digits.data() + digits.size() || id < 1) {
        throw ConfigError(s.line, s.name, "group sections are named group.1, group.2, ...");
      }
      UserGroup g;
      r.read("users", g.users);
      r.read("alpha_db", g.alpha_db);
      r.read("packets_per_frame", g.packets_per_frame);
      r.read("delay_ms", g.delay_ms);
      groups[id] = g;
      group_lines[id] = s.line;
    } else if (s.name == "auction") {
      read_learner(r, cfg.auction);
    } else if (s.name == "joint") {
      read_learner(r, cfg.joint);
      r.read("gamma", cfg.gamma);
      r.read("cell_budget", cfg.cell_budget);
    } else if (s.name == "sweep") {
      SweepSpec sw;
      for (const auto& e : s.entries) {
        if (e.key == "groups") {
          r.find("groups");
          sw.groups = r.ints(e);
          continue;
        }
        const auto field = sweep_field_from_string(e.key);
        if (!field) throw ConfigError(e.line, r.field(e), "unknown sweep field");
        r.find(e.key);
        sw.columns.push_back({*field, r.doubles(e)});
      }
      cfg.sweep = std::move(sw);
    } else if (s.name == "calibration") {
      CalibrationSpec cal;
      r.read("peak_powers", cal.peak_powers);
      cfg.calibration = std::move(cal);
    } else if (s.name == "oracle") {
      OracleSpec o;
      r.read("buffer", o.buffer);
      r.read("delay_ms", o.delay_ms);
      r.read("arrival_pmf", o.arrival_pmf);
      r.read("channel_pmf", o.channel_pmf);
      r.read("failure_prob", o.failure_prob);
      r.read("learner_horizon", o.learner_horizon);
      r.read("learner_runs", o.learner_runs);
      cfg.oracle = std::move(o);
    } else {
      throw ConfigError(s.line, s.name, "unknown section");
    }
    r.finish();
  }

  int expect = 1;
  for (const auto& [id, g] : groups) {
    if (id != expect) {
      throw ConfigError(group_lines[id], "group." + std::to_string(id),
                        "groups must be numbered 1, 2, ... without gaps");
    }
    cfg.groups.push_back(g);
    ++expect;
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << "[scenario]\n"
     << "name = " << cfg.name << '\n'
     << "schedulers = ";
  for (std::size_t i = 0; i < cfg.schedulers.size(); ++i) {
    os << (i ? ", " : "") << to_string(cfg.schedulers[i]);
  }
  os << '\n'
     << "runs = " << cfg.runs << '\n'
     << "seed_base = " << cfg.seed_base << '\n'
     << "horizon = " << cfg.horizon << '\n'
     << "warmup = " << cfg.warmup << "\n\n";

  os << "[system]\n"
     << "buffer = " << cfg.buffer << '\n'
     << "frame_ms = " << fmt(cfg.frame_ms) << '\n'
     << "peak_power = " << fmt(cfg.power.peak_power) << '\n'
     << "noise_bandwidth = " << fmt(cfg.power.n0w) << '\n'
     << "symbols_per_slot = " << fmt(cfg.power.symbols_per_slot) << '\n'
     << "fragment_bits = " << cfg.power.fragment_bits << '\n'
     << "max_rate = " << cfg.power.max_rate_fragments << '\n';
  if (!cfg.channel_boundaries_db.empty() || !cfg.channel_levels_db.empty()) {
    os << "channel_boundaries_db = " << fmt(cfg.channel_boundaries_db) << '\n'
       << "channel_levels_db = " << fmt(cfg.channel_levels_db) << '\n';
  }
  os << '\n';

  os << "[traffic]\n"
     << "pareto_shape = " << fmt(cfg.pareto_shape) << '\n'
     << "pareto_mode_bits = " << fmt(cfg.pareto_mode_bits) << '\n'
     << "pareto_cutoff_bits = " << fmt(cfg.pareto_cutoff_bits) << "\n\n";

  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    const auto& grp = cfg.groups[g];
    os << "[group." << g + 1 << "]\n"
       << "users = " << grp.users << '\n'
       << "alpha_db = " << fmt(grp.alpha_db) << '\n'
       << "packets_per_frame = " << fmt(grp.packets_per_frame) << '\n'
       << "delay_ms = " << fmt(grp.delay_ms) << "\n\n";
  }

  os << "[auction]\n";
  write_learner(os, cfg.auction);
  os << "\n[joint]\n";
  write_learner(os, cfg.joint);
  if (!cfg.gamma.empty()) os << "gamma = " << fmt(cfg.gamma) << '\n';
  os << "cell_budget = " << fmt(cfg.cell_budget) << '\n';

  if (cfg.sweep) {
    os << "\n[sweep]\n";
    if (!cfg.sweep->groups.empty()) {
      os << "groups = ";
      for (std::size_t i = 0; i < cfg.sweep->groups.size(); ++i) {
        os << (i ? ", " : "") << cfg.sweep->groups[i];
      }
      os << '\n';
    }
    for (const auto& c : cfg.sweep->columns) {
      os << to_string(c.field) << " = " << fmt(c.values) << '\n';
    }
  }
  if (cfg.calibration) {
    os << "\n[calibration]\n"
       << "peak_powers = " << fmt(cfg.calibration->peak_powers) << '\n';
  }
  if (cfg.oracle) {
    const auto& o = *cfg.oracle;
    os << "\n[oracle]\n"
       << "buffer = " << o.buffer << '\n'
       << "delay_ms = " << fmt(o.delay_ms) << '\n';
    if (!o.arrival_pmf.empty()) os << "arrival_pmf = " << fmt(o.arrival_pmf) << '\n';
    if (!o.channel_pmf.empty()) os << "channel_pmf = " << fmt(o.channel_pmf) << '\n';
    os << "failure_prob = " << fmt(o.failure_prob) << '\n'
       << "learner_horizon = " << o.learner_horizon << '\n'
       << "learner_runs = " << o.learner_runs << '\n';
  }
  return os.str();
}

}  // namespace uplink
