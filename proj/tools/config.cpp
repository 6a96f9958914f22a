#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "membrane/io.hpp"

namespace membrane::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc{} || r.ptr != end) throw UsageError("config: bad value for " + key + ": '" + text + "'");
  return v;
}

std::vector<int> parse_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number<int>(key, item));
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "n") c.dim = parse_number<int>(key, value);
  else if (key == "N") c.sizes = parse_list(key, value);
  else if (key == "L") c.margins = parse_list(key, value);
  else if (key == "gamma") c.gamma = parse_number<double>(key, value);
  else if (key == "trials") c.trials = parse_number<std::uint64_t>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "first_stream") c.first_stream = parse_number<std::uint64_t>(key, value);
  else if (key == "block_size") c.block_size = parse_number<std::size_t>(key, value);
  else if (key == "workers") c.workers = parse_number<unsigned>(key, value);
  else if (key == "out") c.out = value;
  else if (key == "event") c.event = value;
  else if (key == "method") c.method = value;
  else if (key == "shift") c.shift = value;
  else if (key == "alpha") c.alpha = parse_number<double>(key, value);
  else if (key == "count") c.count = parse_number<std::uint64_t>(key, value);
  else throw UsageError("config: unknown key '" + key + "'");
}

void validate(const ExperimentConfig& c) {
  if (c.dim != 2 && c.dim != 3) throw UsageError("config: n must be 2 or 3");
  if (c.sizes.empty()) throw UsageError("config: N list is empty");
  for (int N : c.sizes)
    if (N < 0) throw UsageError("config: N must be >= 0");
  if (c.margins.empty()) throw UsageError("config: L list is empty");
  for (int L : c.margins)
    if (L < 0) throw UsageError("config: L must be >= 0");
  if (!(c.gamma > 0.0 && c.gamma < 0.5)) throw UsageError("config: gamma must lie in (0, 1/2)");
  if (c.trials < 1) throw UsageError("config: trials must be >= 1");
  if (c.block_size < 1) throw UsageError("config: block_size must be >= 1");
  if (c.workers < 1) throw UsageError("config: workers must be >= 1");
  if (c.count < 1) throw UsageError("config: count must be >= 1");
  if (c.alpha < 0.0) throw UsageError("config: alpha must be >= 0");
  if (c.event != "positivity" && c.event != "smallness") throw UsageError("config: event must be positivity|smallness");
  if (c.method != "direct" && c.method != "tilted") throw UsageError("config: method must be direct|tilted");
  if (c.shift != "none" && c.shift != "phi") throw UsageError("config: shift must be none|phi");
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{"n",       "N",     "L",     "gamma", "trials", "seed",
                                             "first_stream", "block_size", "workers", "out", "event",
                                             "method",  "shift", "alpha", "count"};
  return keys;
}

std::uint64_t ExperimentConfig::hash(const std::string& command) const {
  std::ostringstream s;
  s << "command=" << command << "\nn=" << dim << "\nN=" << join(sizes) << "\nL=" << join(margins)
    << "\ngamma=" << format_double(gamma) << "\ntrials=" << trials << "\nseed=" << seed
    << "\nfirst_stream=" << first_stream << "\nblock_size=" << block_size << "\nevent=" << event
    << "\nmethod=" << method << "\nshift=" << shift << "\nalpha=" << format_double(alpha) << "\ncount=" << count
    << '\n';
  return fnv1a64(s.str());
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config: " + path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
      throw UsageError("config: " + path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::pair<std::string, std::string> split_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw UsageError("override '" + text + "' is not key=value");
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

ExperimentConfig resolve_config(const std::vector<std::pair<std::string, std::string>>& entries) {
  ExperimentConfig c;
  for (const auto& [k, v] : entries) apply(c, k, v);
  validate(c);
  return c;
}

}  // namespace membrane::cli
