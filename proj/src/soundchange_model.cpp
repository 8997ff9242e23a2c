#include "sctree/soundchange_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include "sctree/error.hpp"
#include "sctree/random.hpp"
#include "sctree/text.hpp"

namespace sctree {

namespace {

constexpr char kMagic[8] = {'S', 'C', 'T', 'F', 'E', 'M', '0', '1'};
constexpr std::uint32_t kFormatVersion = 1;

Eigen::VectorXd to_vector(const OneHotEncoding& e) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(e.size()));
  for (std::size_t i = 0; i < e.size(); ++i) v[static_cast<Eigen::Index>(i)] = e.bits[i];
  return v;
}

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Numerically stable BCE of sigmoid(z) against y in {0,1}.
double bce_with_logit(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct ForwardCache {
  std::vector<Eigen::MatrixXd> pre;   // z_1 .. z_d  (index i-1)
  std::vector<Eigen::MatrixXd> post;  // a_0 .. a_{d-1}
};

Eigen::MatrixXd run_forward(const std::vector<DenseLayer>& layers, bool skip,
                            const Eigen::MatrixXd& inputs, ForwardCache* cache) {
  const std::size_t depth = layers.size();
  std::vector<Eigen::MatrixXd> post;
  post.reserve(depth);
  post.push_back(inputs);
  std::vector<Eigen::MatrixXd> pre;
  pre.reserve(depth);
  for (std::size_t i = 1; i <= depth; ++i) {
    const auto& layer = layers[i - 1];
    Eigen::MatrixXd z = layer.weight * post[i - 1];
    z.colwise() += layer.bias;
    if (i == depth) {
      pre.push_back(std::move(z));
      break;
    }
    if (skip && i % 2 == 0) z += post[i - 2];
    post.push_back(z.cwiseMax(0.0));
    pre.push_back(std::move(z));
  }
  Eigen::MatrixXd out = pre.back();
  if (cache) {
    cache->pre = std::move(pre);
    cache->post = std::move(post);
  }
  return out;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(const std::string& data, std::string source) : data_(data), source_(std::move(source)) {}
  std::uint64_t take(int bytes) {
    if (pos_ + static_cast<std::size_t>(bytes) > data_.size()) {
      throw ParseError(source_, 0, "truncated model file");
    }
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
    }
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
  std::uint64_t u64() { return take(8); }
  double f64() { return std::bit_cast<double>(take(8)); }
  bool done() const { return pos_ == data_.size(); }
  const std::string& source() const { return source_; }

 private:
  const std::string& data_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

SoundChangeLoad load_sound_changes(const std::filesystem::path& path,
                                   const PhoneFeatureTable& table,
                                   const std::vector<std::string>& excluded_families) {
  const auto lines = read_lines(path);
  SoundChangeLoad out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (trim(line).empty() || line.front() == '#') continue;
    auto cells = split(line, '\t');
    if (i == 0 && !cells.empty() && trim(cells[0]) == "source") continue;
    if (cells.size() < 2) {
      throw ParseError(path.string(), i + 1, "expected source<TAB>target<TAB>family");
    }
    SoundChangeRecord rec{std::string(trim(cells[0])), std::string(trim(cells[1])),
                          cells.size() > 2 ? std::string(trim(cells[2])) : std::string()};
    if (std::find(excluded_families.begin(), excluded_families.end(), rec.family) !=
        excluded_families.end()) {
      ++out.skipped_family;
      continue;
    }
    if (!table.contains(rec.source) || !table.contains(rec.target)) {
      ++out.skipped_unknown;
      continue;
    }
    rec.source = table.canonical(rec.source);
    rec.target = table.canonical(rec.target);
    if (table.encode(rec.source) == table.encode(rec.target)) {
      ++out.skipped_identity;
      continue;
    }
    out.records.push_back(std::move(rec));
  }
  if (out.records.empty()) {
    throw Error("no usable sound changes in '" + path.string() + "'");
  }
  return out;
}

TrainingPair make_training_pair(const SoundChangeRecord& record, const PhoneFeatureTable& table) {
  const auto& s = table.encode(record.source);
  const auto& t = table.encode(record.target);
  TrainingPair pair;
  pair.input = one_hot(s);
  pair.target.bits.assign(2 * s.size(), 0);
  for (std::size_t f = 0; f < s.size(); ++f) {
    if (t[f] > s[f]) pair.target.bits[2 * f] = 1;
    if (t[f] < s[f]) pair.target.bits[2 * f + 1] = 1;
  }
  return pair;
}

FeatureEditModel::FeatureEditModel(std::size_t feature_count, int depth, std::uint64_t seed,
                                   std::uint64_t feature_names_hash)
    : feature_count_(feature_count), seed_(seed), names_hash_(feature_names_hash) {
  if (!supported_depth(depth)) {
    throw Error("unsupported network depth " + std::to_string(depth) + " (use 1, 4, 8 or 16)");
  }
  if (feature_count == 0) throw Error("feature count must be positive");
  const auto width = static_cast<Eigen::Index>(3 * feature_count);
  const auto out = static_cast<Eigen::Index>(2 * feature_count);
  Rng rng(seed);
  for (int i = 0; i < depth; ++i) {
    const Eigen::Index rows = (i == depth - 1) ? out : width;
    DenseLayer layer{Eigen::MatrixXd(rows, width), Eigen::VectorXd(rows)};
    const double bound = 1.0 / std::sqrt(static_cast<double>(width));
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < width; ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
    }
    for (Eigen::Index r = 0; r < rows; ++r) layer.bias[r] = rng.uniform(-bound, bound);
    layers_.push_back(std::move(layer));
  }
}

FeatureEditModel FeatureEditModel::zeros(std::size_t feature_count, int depth) {
  FeatureEditModel m(feature_count, depth, 0);
  for (auto& l : m.layers_) {
    l.weight.setZero();
    l.bias.setZero();
  }
  return m;
}

Eigen::MatrixXd FeatureEditModel::logits(const Eigen::MatrixXd& inputs) const {
  return run_forward(layers_, has_skip(), inputs, nullptr);
}

Eigen::VectorXd FeatureEditModel::probabilities(const OneHotEncoding& input) const {
  if (input.size() != input_width()) throw Error("input width does not match model");
  Eigen::VectorXd z = logits(to_vector(input)).col(0);
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

bool operator==(const FeatureEditModel& a, const FeatureEditModel& b) {
  if (a.feature_count_ != b.feature_count_ || a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    if (a.layers_[i].weight != b.layers_[i].weight || a.layers_[i].bias != b.layers_[i].bias) {
      return false;
    }
  }
  return true;
}

void FeatureEditModel::save(const std::filesystem::path& path) const {
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(feature_count_));
  put_u32(out, static_cast<std::uint32_t>(depth()));
  put_u32(out, has_skip() ? 1 : 0);
  put_u64(out, seed_);
  put_u64(out, names_hash_);
  put_u32(out, static_cast<std::uint32_t>(epochs_trained));
  put_u32(out, static_cast<std::uint32_t>(layers_.size()));
  for (const auto& l : layers_) {
    put_u32(out, static_cast<std::uint32_t>(l.weight.rows()));
    put_u32(out, static_cast<std::uint32_t>(l.weight.cols()));
  }
  for (const auto& l : layers_) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) put_f64(out, l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) put_f64(out, l.bias[r]);
  }
  write_file(path, out);
}

FeatureEditModel FeatureEditModel::load(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() < sizeof kMagic || !std::equal(kMagic, kMagic + sizeof kMagic, data.begin())) {
    throw ParseError(path.string(), 0, "not a feature-edit model file");
  }
  Reader in(data, path.string());
  in.take(4), in.take(4);  // magic
  if (in.u32() != kFormatVersion) throw ParseError(path.string(), 0, "unsupported model version");
  FeatureEditModel m;
  m.feature_count_ = in.u32();
  const auto depth = static_cast<int>(in.u32());
  const bool skip = in.u32() != 0;
  m.seed_ = in.u64();
  m.names_hash_ = in.u64();
  m.epochs_trained = static_cast<int>(in.u32());
  const auto layer_count = in.u32();
  if (!supported_depth(depth) || layer_count != static_cast<std::uint32_t>(depth) ||
      skip != (depth >= 8)) {
    throw ParseError(path.string(), 0, "inconsistent model header");
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> shapes;
  for (std::uint32_t i = 0; i < layer_count; ++i) {
    const auto rows = in.u32();  // sequenced: argument order is unspecified
    shapes.emplace_back(rows, in.u32());
  }
  for (const auto& [rows, cols] : shapes) {
    DenseLayer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) l.weight(r, c) = in.f64();
    }
    for (Eigen::Index r = 0; r < rows; ++r) l.bias[r] = in.f64();
    m.layers_.push_back(std::move(l));
  }
  if (!in.done()) throw ParseError(path.string(), 0, "trailing bytes in model file");
  return m;
}

double loss_and_gradient(const FeatureEditModel& model, std::span<const TrainingPair> batch,
                         std::vector<DenseLayer>* grad) {
  if (batch.empty()) return 0.0;
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto in_w = static_cast<Eigen::Index>(model.input_width());
  const auto out_w = static_cast<Eigen::Index>(model.output_width());
  Eigen::MatrixXd x(in_w, n);
  Eigen::MatrixXd y(out_w, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& p = batch[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < in_w; ++i) x(i, j) = p.input.bits[static_cast<std::size_t>(i)];
    for (Eigen::Index i = 0; i < out_w; ++i) y(i, j) = p.target.bits[static_cast<std::size_t>(i)];
  }
  ForwardCache cache;
  const auto& layers = model.layers();
  const bool skip = model.has_skip();
  const Eigen::MatrixXd z = run_forward(layers, skip, x, grad ? &cache : nullptr);
  const double scale = 1.0 / static_cast<double>(n * out_w);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < out_w; ++i) loss += bce_with_logit(z(i, j), y(i, j));
  }
  loss *= scale;
  if (!grad) return loss;

  const std::size_t depth = layers.size();
  grad->resize(depth);
  // upstream[i] = d(loss)/d(a_i) for i in [0, depth-1].
  std::vector<Eigen::MatrixXd> upstream(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    upstream[i] = Eigen::MatrixXd::Zero(cache.post[i].rows(), n);
  }
  Eigen::MatrixXd dz = (z.unaryExpr([](double v) { return sigmoid(v); }) - y) * scale;
  for (std::size_t i = depth; i >= 1; --i) {
    const auto& layer = layers[i - 1];
    if (i < depth) {
      dz = upstream[i].cwiseProduct(
          cache.pre[i - 1].unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    }
    (*grad)[i - 1].weight = dz * cache.post[i - 1].transpose();
    (*grad)[i - 1].bias = dz.rowwise().sum();
    upstream[i - 1] += layer.weight.transpose() * dz;
    if (skip && i < depth && i % 2 == 0) upstream[i - 2] += dz;
  }
  return loss;
}

FeatureEditModel train(const std::vector<SoundChangeRecord>& records,
                       const PhoneFeatureTable& table, const TrainingConfig& config) {
  if (records.empty()) throw TrainingError("empty training set");
  if (config.batch_size == 0) throw TrainingError("batch size must be positive");
  std::vector<TrainingPair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) pairs.push_back(make_training_pair(r, table));

  Rng split_rng(derive_seed(config.seed, "split"));
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  split_rng.shuffle(std::span(order));
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::floor(config.train_fraction * static_cast<double>(pairs.size()))),
      1, pairs.size());
  std::vector<TrainingPair> train_set, test_set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? train_set : test_set).push_back(pairs[order[i]]);
  }

  FeatureEditModel model(table.feature_count(), config.depth, derive_seed(config.seed, "init"),
                         table.feature_names_hash());
  model.seed_ = config.seed;
  auto& layers = model.layers();
  std::vector<DenseLayer> m1, m2, grad;
  for (const auto& l : layers) {
    m1.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                  Eigen::VectorXd::Zero(l.bias.size())});
  }
  m2 = m1;

  Rng batch_rng(derive_seed(config.seed, "batches"));
  std::vector<std::size_t> idx(train_set.size());
  std::vector<TrainingPair> batch;
  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(idx.begin(), idx.end(), 0);
    batch_rng.shuffle(std::span(idx));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < idx.size(); start += config.batch_size) {
      const std::size_t end = std::min(idx.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(train_set[idx[k]]);
      const double loss = loss_and_gradient(model, batch, &grad);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_loss += loss * static_cast<double>(batch.size());
      ++step;
      const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
      auto adam = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
        param.array() -= config.learning_rate * (m.array() / c1) /
                         ((v.array() / c2).sqrt() + config.epsilon);
      };
      for (std::size_t i = 0; i < layers.size(); ++i) {
        adam(layers[i].weight, m1[i].weight, m2[i].weight, grad[i].weight);
        adam(layers[i].bias, m1[i].bias, m2[i].bias, grad[i].bias);
      }
    }
    EpochLoss rec;
    rec.epoch = epoch;
    rec.train_bce = epoch_loss / static_cast<double>(train_set.size());
    if (!test_set.empty()) rec.test_bce = loss_and_gradient(model, test_set, nullptr);
    model.history.push_back(rec);
  }
  model.epochs_trained = config.epochs;
  return model;
}

std::vector<double> predict(const FeatureEditModel& model, std::string_view source,
                            const PhoneFeatureTable& table) {
  if (model.feature_count() != table.feature_count()) {
    throw Error("model feature count does not match the feature table");
  }
  const Eigen::VectorXd p = model.probabilities(one_hot(table.encode(source)));
  return {p.data(), p.data() + p.size()};
}

double dwfed_from_probabilities(const FeatureVector& source, const FeatureVector& target,
                                std::span<const double> probabilities) {
  double cost = 0.0;
  for (std::size_t f = 0; f < source.size(); ++f) {
    if (target[f] == source[f]) continue;
    const double p = target[f] > source[f] ? probabilities[2 * f] : probabilities[2 * f + 1];
    cost += 1.0 - p;
  }
  return cost;
}

double dwfed(const FeatureEditModel& model, const PhoneFeatureTable& table,
             std::string_view source, std::string_view target) {
  const auto& s = table.encode(source);
  const auto& t = table.encode(target);
  if (s == t) return 0.0;
  const auto probs = predict(model, source, table);
  return dwfed_from_probabilities(s, t, probs);
}

}  // namespace sctree
