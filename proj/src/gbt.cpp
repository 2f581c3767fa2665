#include "treesynth/gbt.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace treesynth {

const char* model_kind_name(ModelKind k) { return k == ModelKind::Policy ? "policy" : "value"; }

double RegressionTree::eval(const FeatureVector& v) const {
  if (nodes.empty()) return 0.0;
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = static_cast<double>(v[static_cast<std::size_t>(n.feature)]) < n.threshold ? n.left : n.right;
  }
  return nodes[i].value;
}

double Model::raw(const FeatureVector& v) const {
  if (v.length() != input_length_) {
    throw ModelError("input length " + std::to_string(v.length()) + " does not match model length " +
                     std::to_string(input_length_));
  }
  double s = base_score_;
  for (const RegressionTree& t : trees_) s += t.eval(v);
  return s;
}

double Model::predict(const FeatureVector& v) const { return std::clamp(raw(v), 0.0, 1.0); }

BoundModel::BoundModel(const Model& model, const FeatureVector& prefix) : base_score_(model.base_score()) {
  if (prefix.length() > model.input_length()) {
    throw ModelError("prefix of length " + std::to_string(prefix.length()) + " exceeds model length " +
                     std::to_string(model.input_length()));
  }
  input_length_ = model.input_length() - prefix.length();
  for (const RegressionTree& t : model.trees()) {
    if (t.nodes.empty()) continue;
    roots_.push_back(bind(t, 0, prefix));
  }
}

std::uint32_t BoundModel::bind(const RegressionTree& t, std::int32_t i, const FeatureVector& prefix) {
  const auto plen = static_cast<std::int32_t>(prefix.length());
  while (t.nodes[i].feature >= 0 && t.nodes[i].feature < plen) {
    const TreeNode& n = t.nodes[i];
    i = static_cast<double>(prefix[static_cast<std::size_t>(n.feature)]) < n.threshold ? n.left : n.right;
  }
  const TreeNode& n = t.nodes[i];
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  if (n.feature < 0) {
    nodes_.push_back({-1, 0, static_cast<std::uint32_t>(values_.size()), 0});
    values_.push_back(n.value);
    return id;
  }
  // Features are counts, so x < t is x < ceil(t).
  std::uint32_t cut = 0;
  if (n.threshold > 4294967295.0) cut = UINT32_MAX;
  else if (n.threshold > 0) cut = static_cast<std::uint32_t>(std::ceil(n.threshold));
  nodes_.push_back({n.feature - plen, cut, 0, 0});
  std::uint32_t left = bind(t, n.left, prefix);
  std::uint32_t right = bind(t, n.right, prefix);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

double BoundModel::predict(const FeatureVector& tail) const {
  if (tail.length() != input_length_) {
    throw ModelError("input length " + std::to_string(tail.length()) + " does not match bound length " +
                     std::to_string(input_length_));
  }
  thread_local std::vector<std::uint32_t> dense;
  if (dense.size() < input_length_) dense.resize(input_length_, 0);
  for (const auto& [i, c] : tail.entries()) dense[i] = c;
  double s = base_score_;
  for (std::uint32_t r : roots_) {
    const Node* n = &nodes_[r];
    while (n->feature >= 0) n = &nodes_[dense[static_cast<std::size_t>(n->feature)] < n->cut ? n->left : n->right];
    s += values_[n->left];
  }
  for (const auto& e : tail.entries()) dense[e.first] = 0;
  return std::clamp(s, 0.0, 1.0);
}

namespace {

std::string exact(double d) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, r.ptr);
}

double parse_exact(const std::string& s) {
  double d = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), d);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ModelError("bad number '" + s + "'");
  return d;
}

constexpr int kFormatVersion = 1;

}  // namespace

std::string Model::to_json() const {
  using nlohmann::ordered_json;
  ordered_json j;
  j["format"] = "treesynth-gbt";
  j["version"] = kFormatVersion;
  j["kind"] = model_kind_name(kind_);
  j["input_length"] = input_length_;
  j["base_score"] = exact(base_score_);
  j["params"] = {{"max_depth", params_.max_depth},
                 {"rounds", params_.rounds},
                 {"learning_rate", exact(params_.learning_rate)},
                 {"lambda", exact(params_.lambda)},
                 {"min_child_rows", params_.min_child_rows},
                 {"seed", params_.seed}};
  j["iterations"] = iterations_;
  ordered_json trees = ordered_json::array();
  for (const RegressionTree& t : trees_) {
    ordered_json feature = ordered_json::array(), threshold = ordered_json::array(),
                 left = ordered_json::array(), right = ordered_json::array(), value = ordered_json::array();
    for (const TreeNode& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(exact(n.threshold));
      left.push_back(n.left);
      right.push_back(n.right);
      value.push_back(exact(n.value));
    }
    trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
                     {"value", value}});
  }
  j["trees"] = trees;
  return j.dump(1) + "\n";
}

Model Model::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model json: ") + e.what());
  }
  try {
    if (j.at("format") != "treesynth-gbt") throw ModelError("not a model file");
    if (j.at("version").get<int>() != kFormatVersion) throw ModelError("unsupported model version");
    std::string kind = j.at("kind");
    if (kind != "policy" && kind != "value") throw ModelError("unknown model kind " + kind);
    Model m(kind == "policy" ? ModelKind::Policy : ModelKind::Value, j.at("input_length").get<std::size_t>(),
            parse_exact(j.at("base_score")));
    const auto& p = j.at("params");
    GbtParams params;
    params.max_depth = p.at("max_depth");
    params.rounds = p.at("rounds");
    params.learning_rate = parse_exact(p.at("learning_rate"));
    params.lambda = parse_exact(p.at("lambda"));
    params.min_child_rows = p.at("min_child_rows");
    params.seed = p.at("seed");
    m.params_ = params;
    m.iterations_ = j.at("iterations").get<std::vector<int>>();
    for (const auto& jt : j.at("trees")) {
      RegressionTree t;
      const auto& f = jt.at("feature");
      t.nodes.resize(f.size());
      for (std::size_t i = 0; i < f.size(); ++i) {
        TreeNode& n = t.nodes[i];
        n.feature = f[i];
        n.threshold = parse_exact(jt.at("threshold").at(i));
        n.left = jt.at("left").at(i);
        n.right = jt.at("right").at(i);
        n.value = parse_exact(jt.at("value").at(i));
        bool bad_child = n.feature >= 0 && (n.left <= static_cast<std::int32_t>(i) ||
                                            n.right <= static_cast<std::int32_t>(i) ||
                                            n.left >= static_cast<std::int32_t>(f.size()) ||
                                            n.right >= static_cast<std::int32_t>(f.size()));
        if (bad_child || n.feature >= static_cast<std::int64_t>(m.input_length_)) {
          throw ModelError("malformed tree node");
        }
      }
      m.trees_.push_back(std::move(t));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("model json: ") + e.what());
  }
}

void Model::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path);
  out << to_json();
  if (!out) throw ModelError("cannot write " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

namespace {

struct ColumnEntry {
  double value;
  std::uint32_t row;
};

struct Split {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<FeatureVector>& x, const std::vector<std::vector<ColumnEntry>>& columns,
              const std::vector<std::uint32_t>& used_features, const GbtParams& p)
      : x_(x), columns_(columns), used_(used_features), p_(p) {}

  RegressionTree build(const std::vector<double>& grad) {
    const std::size_t n = x_.size();
    RegressionTree tree;
    tree.nodes.push_back({});
    std::vector<std::int32_t> node_of(n, 0);
    std::vector<std::int32_t> frontier = {0};
    for (int depth = 0; !frontier.empty(); ++depth) {
      // Per-frontier-slot totals.
      std::vector<std::int32_t> slot_of(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[frontier[s]] = static_cast<std::int32_t>(s);
      const std::size_t k = frontier.size();
      std::vector<double> g_total(k, 0.0), n_total(k, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (node_of[i] < 0) continue;
        std::int32_t s = slot_of[node_of[i]];
        g_total[s] += grad[i];
        n_total[s] += 1.0;
      }
      for (std::size_t s = 0; s < k; ++s) {
        tree.nodes[frontier[s]].value = -p_.learning_rate * g_total[s] / (n_total[s] + p_.lambda);
      }
      if (depth >= p_.max_depth) break;

      std::vector<Split> best(k);
      std::vector<double> base_score(k);
      for (std::size_t s = 0; s < k; ++s) base_score[s] = g_total[s] * g_total[s] / (n_total[s] + p_.lambda);
      std::vector<double> nz_g(k), nz_n(k), cum_g(k), cum_n(k), last(k);
      std::vector<char> seen(k);
      std::vector<std::uint32_t> touched;
      for (std::uint32_t f : used_) {
        const auto& col = columns_[f];
        touched.clear();
        for (const ColumnEntry& e : col) {
          std::int32_t node = node_of[e.row];
          if (node < 0) continue;
          std::int32_t s = slot_of[node];
          if (!seen[s]) {
            seen[s] = 1;
            touched.push_back(static_cast<std::uint32_t>(s));
            nz_g[s] = nz_n[s] = cum_g[s] = cum_n[s] = 0.0;
          }
          nz_g[s] += grad[e.row];
          nz_n[s] += 1.0;
        }
        for (std::uint32_t s : touched) seen[s] = 0;
        for (const ColumnEntry& e : col) {
          std::int32_t node = node_of[e.row];
          if (node < 0) continue;
          std::int32_t s = slot_of[node];
          if (!seen[s]) {
            seen[s] = 1;
            last[s] = 0.0;
            // Left side starts with the rows whose value is zero.
            cum_g[s] = g_total[s] - nz_g[s];
            cum_n[s] = n_total[s] - nz_n[s];
          }
          if (e.value != last[s] && cum_n[s] > 0) consider(s, f, 0.5 * (last[s] + e.value), cum_g[s], cum_n[s],
                                                           g_total[s], n_total[s], base_score[s], best);
          cum_g[s] += grad[e.row];
          cum_n[s] += 1.0;
          last[s] = e.value;
        }
        for (std::uint32_t s : touched) seen[s] = 0;
      }

      std::vector<std::int32_t> next;
      std::vector<std::int32_t> left_of(tree.nodes.size(), -1);
      for (std::size_t s = 0; s < k; ++s) {
        std::int32_t id = frontier[s];
        if (best[s].feature < 0) continue;
        std::int32_t l = static_cast<std::int32_t>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.push_back({});
        TreeNode& node = tree.nodes[id];
        node.feature = best[s].feature;
        node.threshold = best[s].threshold;
        node.left = l;
        node.right = l + 1;
        node.value = 0.0;
        next.push_back(l);
        next.push_back(l + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        std::int32_t id = node_of[i];
        if (id < 0) continue;
        const TreeNode& node = tree.nodes[id];
        if (node.feature < 0) {
          node_of[i] = -1;  // settled in a leaf
          continue;
        }
        node_of[i] = static_cast<double>(x_[i][static_cast<std::size_t>(node.feature)]) < node.threshold
                         ? node.left
                         : node.right;
      }
      frontier = std::move(next);
    }
    return tree;
  }

 private:
  void consider(std::size_t s, std::uint32_t f, double threshold, double gl, double nl, double g, double n,
                double parent, std::vector<Split>& best) const {
    double gr = g - gl;
    double nr = n - nl;
    if (nl < static_cast<double>(p_.min_child_rows) || nr < static_cast<double>(p_.min_child_rows)) return;
    double gain = gl * gl / (nl + p_.lambda) + gr * gr / (nr + p_.lambda) - parent;
    if (gain > 1e-12 && gain > best[s].gain) best[s] = {gain, static_cast<std::int32_t>(f), threshold};
  }

  const std::vector<FeatureVector>& x_;
  const std::vector<std::vector<ColumnEntry>>& columns_;
  const std::vector<std::uint32_t>& used_;
  const GbtParams& p_;
};

}  // namespace

Model train_gbt(const std::vector<FeatureVector>& inputs, const std::vector<double>& targets, ModelKind kind,
                const GbtParams& params) {
  if (inputs.empty()) throw ModelError("cannot train on an empty dataset");
  if (inputs.size() != targets.size()) throw ModelError("inputs and targets differ in length");
  const std::size_t length = inputs.front().length();
  for (const FeatureVector& v : inputs) {
    if (v.length() != length) throw ModelError("training vectors differ in length");
  }
  if (params.max_depth < 0 || params.rounds < 0 || params.lambda < 0) throw ModelError("bad boosting parameters");

  std::vector<std::vector<ColumnEntry>> columns(length);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (const auto& [f, c] : inputs[i].entries()) columns[f].push_back({static_cast<double>(c), static_cast<std::uint32_t>(i)});
  }
  std::vector<std::uint32_t> used;
  for (std::uint32_t f = 0; f < length; ++f) {
    if (columns[f].empty()) continue;
    std::stable_sort(columns[f].begin(), columns[f].end(),
                     [](const ColumnEntry& a, const ColumnEntry& b) { return a.value < b.value; });
    used.push_back(f);
  }

  const double base = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
  Model m(kind, length, base);
  m.set_params(params);
  std::vector<double> pred(inputs.size(), base);
  std::vector<double> grad(inputs.size());
  TreeBuilder builder(inputs, columns, used, params);
  for (int round = 0; round < params.rounds; ++round) {
    double max_abs = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      grad[i] = pred[i] - targets[i];
      max_abs = std::max(max_abs, std::abs(grad[i]));
    }
    if (max_abs < 1e-12) break;  // residuals vanished
    RegressionTree t = builder.build(grad);
    for (std::size_t i = 0; i < inputs.size(); ++i) pred[i] += t.eval(inputs[i]);
    m.add_tree(std::move(t));
  }
  return m;
}

}  // namespace treesynth
