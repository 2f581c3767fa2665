#include "treesynth/training.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "treesynth/grammar.hpp"

namespace treesynth {

std::vector<TrainingRow> extract_training_data(const SearchTrace& trace, bool solved, const RowTags& tags,
                                               std::size_t n) {
  std::vector<TrainingRow> rows;
  const std::size_t len = trace.path.size();
  auto row = [&](ModelKind kind, FeatureVector v, double target) {
    rows.push_back({kind, std::move(v), target, tags.iteration, tags.problem, tags.split});
  };
  for (std::size_t i = 0; i < len; ++i) {
    PartialProgram h(trace.path[i].state);
    double target = solved ? std::pow(0.9, static_cast<double>(len - 1 - i)) : 0.0;
    row(ModelKind::Value, encode_state(trace.constraint, h, n), target);
  }
  if (!solved) return rows;
  for (std::size_t i = 0; i + 1 < len; ++i) {
    const TraceNode& node = trace.path[i];
    PartialProgram h(node.state);
    std::uint64_t total = 0;
    for (const TraceChild& c : node.children) total += c.visits;
    for (const TraceChild& c : node.children) {
      double target;
      if (total > 0) target = static_cast<double>(c.visits) / static_cast<double>(total);
      else target = c.state == trace.path[i + 1].state ? 1.0 : 0.0;  // only the final descent went through here
      row(ModelKind::Policy, encode_action(trace.constraint, h, PartialProgram(c.state), n), target);
    }
  }
  return rows;
}

Model train(const std::vector<TrainingRow>& rows, ModelKind kind, const GbtParams& params) {
  std::vector<FeatureVector> inputs;
  std::vector<double> targets;
  std::vector<int> iterations;
  for (const TrainingRow& r : rows) {
    if (r.kind != kind) continue;
    inputs.push_back(r.input);
    targets.push_back(r.target);
    if (std::find(iterations.begin(), iterations.end(), r.iteration) == iterations.end()) {
      iterations.push_back(r.iteration);
    }
  }
  if (inputs.empty()) throw ModelError(std::string("no ") + model_kind_name(kind) + " rows to train on");
  std::sort(iterations.begin(), iterations.end());
  Model m = train_gbt(inputs, targets, kind, params);
  m.set_iterations(std::move(iterations));
  return m;
}

std::string rle_encode(const FeatureVector& v) {
  std::string out;
  std::size_t pos = 0;
  auto token = [&](const std::string& t) {
    if (!out.empty()) out += ' ';
    out += t;
  };
  for (const auto& [i, c] : v.entries()) {
    if (i > pos) token("z" + std::to_string(i - pos));
    token(std::to_string(c));
    pos = i + 1;
  }
  if (v.length() > pos) token("z" + std::to_string(v.length() - pos));
  return out;
}

namespace {

std::uint64_t parse_count(std::string_view s) {
  std::uint64_t v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number '" + std::string(s) + "'");
  }
  return v;
}

std::string exact(double d) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, r.ptr);
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace

FeatureVector rle_decode(const std::string& text, std::size_t length) {
  std::vector<FeatureVector::Entry> entries;
  std::size_t pos = 0;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    if (tok[0] == 'z') {
      pos += parse_count(std::string_view(tok).substr(1));
    } else {
      entries.push_back({static_cast<std::uint32_t>(pos), static_cast<std::uint32_t>(parse_count(tok))});
      ++pos;
    }
  }
  if (pos != length) throw std::invalid_argument("run-length encoding does not cover the vector length");
  return FeatureVector(length, std::move(entries));
}

std::string rows_to_csv(const std::vector<TrainingRow>& rows) {
  std::string out = "kind,iteration,split,problem,target,length,features\n";
  for (const TrainingRow& r : rows) {
    out += model_kind_name(r.kind);
    out += ',' + std::to_string(r.iteration) + ',' + r.split + ',' + quote(r.problem) + ',' + exact(r.target) +
           ',' + std::to_string(r.input.length()) + ',' + rle_encode(r.input) + '\n';
  }
  return out;
}

std::vector<TrainingRow> rows_from_csv(const std::string& text) {
  std::vector<TrainingRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 7) throw std::invalid_argument("training csv: expected 7 fields");
    TrainingRow r;
    if (f[0] == "policy") r.kind = ModelKind::Policy;
    else if (f[0] == "value") r.kind = ModelKind::Value;
    else throw std::invalid_argument("training csv: unknown kind " + f[0]);
    r.iteration = static_cast<int>(parse_count(f[1]));
    r.split = f[2];
    r.problem = f[3];
    auto res = std::from_chars(f[4].data(), f[4].data() + f[4].size(), r.target);
    if (res.ec != std::errc()) throw std::invalid_argument("training csv: bad target");
    r.input = rle_decode(f[6], parse_count(f[5]));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace treesynth
