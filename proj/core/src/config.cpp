#include "aglab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace aglab {

using nlohmann::json;

ConfigError::ConfigError(std::string source, std::size_t line, std::size_t column,
                         const std::string& what)
    : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) + ":" +
                                                  std::to_string(column)
                                            : std::string{}) +
                         ": " + what),
      source_(std::move(source)),
      line_(line),
      column_(column) {}

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

std::uint64_t parse_number(std::string_view token) {
  std::uint64_t value = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr == first) {
    throw ConfigError("<list>", 0, 0, "expected a number, got '" + std::string(token) + "'");
  }
  std::string_view suffix{ptr, static_cast<std::size_t>(last - ptr)};
  std::uint64_t scale = 1;
  if (!suffix.empty()) {
    const char unit = static_cast<char>(std::toupper(static_cast<unsigned char>(suffix.front())));
    const std::string_view rest = suffix.substr(1);
    if (rest != "" && rest != "iB" && rest != "B") {
      throw ConfigError("<list>", 0, 0, "unknown suffix in '" + std::string(token) + "'");
    }
    switch (unit) {
      case 'K': scale = 1ULL << 10; break;
      case 'M': scale = 1ULL << 20; break;
      case 'G': scale = 1ULL << 30; break;
      default:
        throw ConfigError("<list>", 0, 0, "unknown suffix in '" + std::string(token) + "'");
    }
  }
  return value * scale;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::uint64_t> parse_count_list(std::string_view text) {
  std::set<std::uint64_t> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = trim(text.substr(start, comma - start));
    start = comma + 1;
    if (item.empty()) {
      if (comma == text.size()) break;
      throw ConfigError("<list>", 0, 0, "empty item in list '" + std::string(text) + "'");
    }

    std::vector<std::string_view> parts;
    std::size_t p0 = 0;
    while (true) {
      const std::size_t colon = item.find(':', p0);
      parts.push_back(trim(item.substr(p0, colon - p0)));
      if (colon == std::string_view::npos) break;
      p0 = colon + 1;
    }
    if (parts.size() == 1) {
      values.insert(parse_number(parts[0]));
      continue;
    }
    if (parts.size() > 3) {
      throw ConfigError("<list>", 0, 0, "range '" + std::string(item) + "' has too many fields");
    }
    const std::uint64_t lo = parse_number(parts[0]);
    const std::uint64_t hi = parse_number(parts[1]);
    if (lo > hi) {
      throw ConfigError("<list>", 0, 0, "range '" + std::string(item) + "' is decreasing");
    }
    bool geometric = false;
    std::uint64_t step = 1;
    if (parts.size() == 3) {
      std::string_view s = parts[2];
      if (!s.empty() && (s.front() == 'x' || s.front() == '*')) {
        geometric = true;
        s.remove_prefix(1);
      }
      step = parse_number(s);
      if (step == 0 || (geometric && step < 2) || (geometric && lo == 0)) {
        throw ConfigError("<list>", 0, 0, "range '" + std::string(item) + "' has a bad step");
      }
    }
    for (std::uint64_t v = lo; v <= hi;) {
      values.insert(v);
      const std::uint64_t next = geometric ? v * step : v + step;
      if (next <= v) break;
      v = next;
    }
  }
  if (values.empty()) throw ConfigError("<list>", 0, 0, "empty list");
  return {values.begin(), values.end()};
}

namespace {

class Reader {
 public:
  Reader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

  [[noreturn]] void fail(std::string_view key, const std::string& what) const {
    std::size_t line = 0;
    std::size_t column = 0;
    if (!key.empty()) {
      const std::string quoted = "\"" + std::string(key) + "\"";
      const std::size_t at = text_.find(quoted);
      if (at != std::string_view::npos) std::tie(line, column) = line_column(text_, at);
    }
    throw ConfigError(std::string(source_), line, column, what);
  }

  double number(const json& obj, std::string_view key) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(key, "missing key '" + std::string(key) + "'");
    if (!it->is_number()) fail(key, "'" + std::string(key) + "' must be a number");
    return it->get<double>();
  }

  std::uint64_t count(const json& value, std::string_view key) const {
    if (!value.is_number_unsigned()) {
      fail(key, "'" + std::string(key) + "' must be a non-negative integer");
    }
    return value.get<std::uint64_t>();
  }

  std::vector<std::uint64_t> count_list(const json& value, std::string_view key) const {
    std::vector<std::uint64_t> out;
    if (value.is_string()) {
      try {
        out = parse_count_list(value.get<std::string>());
      } catch (const ConfigError& e) {
        fail(key, std::string(key) + ": " + e.what());
      }
    } else if (value.is_array()) {
      for (const auto& v : value) out.push_back(count(v, key));
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
    } else {
      fail(key, "'" + std::string(key) + "' must be a list or a range string");
    }
    if (out.empty()) fail(key, "'" + std::string(key) + "' must not be empty");
    return out;
  }

  TopologyNode node(const json& obj) const {
    if (obj.is_number_unsigned()) return TopologyNode::machine(static_cast<std::uint32_t>(obj.get<std::uint64_t>()));
    if (!obj.is_object()) fail("children", "topology nodes must be objects or slot counts");
    if (const auto it = obj.find("children"); it != obj.end()) {
      if (!it->is_array() || it->empty()) fail("children", "'children' must be a non-empty array");
      TopologyNode n;
      for (const auto& child : *it) n.children.push_back(node(child));
      return n;
    }
    if (const auto it = obj.find("slots"); it != obj.end()) {
      return TopologyNode::machine(static_cast<std::uint32_t>(count(*it, "slots")));
    }
    fail("children", "topology node needs 'slots' or 'children'");
  }

  Topology topology(const json& obj) const {
    if (!obj.is_object()) fail("topology", "topology must be an object");
    if (const auto it = obj.find("preset"); it != obj.end()) {
      if (!it->is_string()) fail("preset", "'preset' must be a string");
      const std::string name = it->get<std::string>();
      if (name == "uniform") {
        const HockneyParams h{obj.contains("alpha") ? number(obj, "alpha") : kDefaultUniformParams.alpha,
                              obj.contains("beta") ? number(obj, "beta") : kDefaultUniformParams.beta};
        const auto slots = obj.contains("slots") ? count(obj["slots"], "slots") : kDefaultUniformSlots;
        return build([&] { return Topology::uniform(h, static_cast<std::uint32_t>(slots)); });
      }
      auto preset = topology_preset(name);
      if (!preset) fail("preset", "unknown topology preset '" + name + "'");
      return *preset;
    }

    const auto levels_it = obj.find("levels");
    if (levels_it == obj.end() || !levels_it->is_array() || levels_it->empty()) {
      fail("levels", "topology needs a non-empty 'levels' array");
    }
    std::vector<TopologyLevel> levels;
    for (const auto& level : *levels_it) {
      if (!level.is_object()) fail("levels", "each level must be an object");
      TopologyLevel l;
      l.name = level.value("name", "level" + std::to_string(levels.size()));
      l.params = {number(level, "alpha"), number(level, "beta")};
      if (l.params.alpha < 0 || l.params.beta < 0) fail("alpha", "alpha and beta must be >= 0");
      levels.push_back(std::move(l));
    }

    TopologyNode root;
    if (const auto it = obj.find("tree"); it != obj.end()) {
      root = node(*it);
    } else if (const auto m = obj.find("machines"); m != obj.end()) {
      if (!m->is_array() || m->empty()) fail("machines", "'machines' must be a non-empty array");
      for (const auto& machine : *m) root.children.push_back(node(machine));
    } else if (const auto s = obj.find("slots"); s != obj.end()) {
      root = TopologyNode::machine(static_cast<std::uint32_t>(count(*s, "slots")));
    } else {
      fail("levels", "topology needs 'tree', 'machines' or 'slots'");
    }
    return build([&] { return Topology(levels, root); });
  }

  template <class F>
  Topology build(F&& make) const {
    try {
      return make();
    } catch (const std::invalid_argument& e) {
      fail("levels", std::string("invalid topology: ") + e.what());
    }
  }

 private:
  std::string_view text_;
  std::string_view source_;
};

}  // namespace

LabConfig parse_config(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ConfigError(std::string(source), line, column, "malformed JSON");
  }
  const Reader reader(text, source);
  if (!doc.is_object()) reader.fail("", "configuration must be a JSON object");

  LabConfig config;
  if (const auto it = doc.find("topology"); it != doc.end()) {
    if (it->is_string()) {
      auto preset = topology_preset(it->get<std::string>());
      if (!preset) reader.fail("topology", "unknown topology preset '" + it->get<std::string>() + "'");
      config.topology = std::move(preset);
    } else {
      config.topology = reader.topology(*it);
    }
  } else if (doc.contains("levels") || doc.contains("preset")) {
    config.topology = reader.topology(doc);
  }

  if (const auto it = doc.find("mapping"); it != doc.end()) {
    const auto kind = it->is_string() ? parse_mapping(it->get<std::string>()) : std::nullopt;
    if (!kind) reader.fail("mapping", "'mapping' must be \"sequential\" or \"cyclic\"");
    config.mapping = kind;
  }
  if (const auto it = doc.find("procs"); it != doc.end()) {
    for (std::uint64_t p : reader.count_list(*it, "procs")) {
      if (p == 0 || p > (1U << 20)) reader.fail("procs", "process counts must be in [1, 2^20]");
      config.procs.push_back(static_cast<std::uint32_t>(p));
    }
  }
  if (const auto it = doc.find("sizes"); it != doc.end()) {
    config.sizes = reader.count_list(*it, "sizes");
    if (config.sizes.front() == 0) reader.fail("sizes", "block sizes must be positive");
  }
  if (const auto it = doc.find("algorithms"); it != doc.end()) {
    if (!it->is_array() || it->empty()) reader.fail("algorithms", "'algorithms' must be a non-empty array");
    for (const auto& a : *it) {
      const auto id = a.is_string() ? parse_algorithm(a.get<std::string>()) : std::nullopt;
      if (!id || *id == AlgorithmId::BinomialBroadcast) {
        reader.fail("algorithms", "unknown Allgather algorithm " + a.dump());
      }
      config.algorithms.push_back(*id);
    }
  }
  if (const auto it = doc.find("seed"); it != doc.end()) config.seed = reader.count(*it, "seed");
  if (const auto it = doc.find("repetitions"); it != doc.end()) {
    const auto reps = reader.count(*it, "repetitions");
    if (reps == 0) reader.fail("repetitions", "'repetitions' must be positive");
    config.repetitions = static_cast<std::uint32_t>(reps);
  }
  return config;
}

LabConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, 0, "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

std::optional<Topology> topology_preset(std::string_view name) {
  if (name == "uniform") return Topology::uniform(kDefaultUniformParams, kDefaultUniformSlots);
  if (name == "yahoo") return Topology::yahoo();
  if (name == "cervino") return Topology::cervino();
  return std::nullopt;
}

Topology resolve_topology(const std::string& name_or_path) {
  if (auto preset = topology_preset(name_or_path)) return *preset;
  LabConfig config = load_config(name_or_path);
  if (!config.topology) throw ConfigError(name_or_path, 0, 0, "file does not describe a topology");
  return *config.topology;
}

}  // namespace aglab
