#include "ckdprog/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ckdprog/common/errors.hpp"
#include "ckdprog/common/rng.hpp"
#include "ckdprog/models/linear.hpp"

namespace ckdprog {
namespace {

constexpr std::uint64_t kInitStream = 0x4D4C5030;
constexpr std::uint64_t kSplitStream = 0x4D4C5031;
constexpr std::uint64_t kShuffleStream = 0x4D4C5032;
constexpr std::uint64_t kDropoutStream = 0x4D4C5033;

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

double bce_with_logits(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

struct Gradients {
  std::vector<MlpLayer> layers;
  std::vector<Eigen::MatrixXd> projections;
};

Gradients zero_like(const MlpModel& model) {
  Gradients g;
  g.layers.reserve(model.layers.size());
  for (const MlpLayer& layer : model.layers)
    g.layers.push_back({Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()),
                        Eigen::VectorXd::Zero(layer.b.size())});
  g.projections.reserve(model.projections.size());
  for (const Eigen::MatrixXd& p : model.projections)
    g.projections.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
  return g;
}

// Dropout masks: one per rectifier site, entries 0 or 1/keep (inverted
// scaling). Empty vector disables dropout.
using Masks = std::vector<Eigen::MatrixXd>;

Eigen::VectorXd forward_plain(const MlpModel& model, const Eigen::MatrixXd& X, const Masks* masks,
                              std::vector<Eigen::MatrixXd>* pre, std::vector<Eigen::MatrixXd>* post) {
  Eigen::MatrixXd a = X;
  const std::size_t hidden = model.layers.size() - 1;
  for (std::size_t l = 0; l < hidden; ++l) {
    Eigen::MatrixXd z =
        (a * model.layers[l].W.transpose()).rowwise() + model.layers[l].b.transpose();
    Eigen::MatrixXd act = relu(z);
    if (masks) act = act.cwiseProduct((*masks)[l]);
    if (pre) pre->push_back(std::move(z));
    if (post) post->push_back(act);
    a = std::move(act);
  }
  const MlpLayer& out = model.layers.back();
  return (a * out.W.transpose()).rowwise() + out.b.transpose();
}

Eigen::VectorXd forward_residual(const MlpModel& model, const Eigen::MatrixXd& X,
                                 const Masks* masks, std::vector<Eigen::MatrixXd>* cache) {
  // cache layout per block k: [h_in, u_z, u]; prefixed by [z_in, a_in].
  Eigen::MatrixXd z_in =
      (X * model.layers[0].W.transpose()).rowwise() + model.layers[0].b.transpose();
  Eigen::MatrixXd h = relu(z_in);
  if (masks) h = h.cwiseProduct((*masks)[0]);
  if (cache) {
    cache->push_back(z_in);
    cache->push_back(h);
  }
  for (int k = 0; k < model.n_blocks; ++k) {
    const MlpLayer& fc1 = model.layers[static_cast<std::size_t>(1 + 2 * k)];
    const MlpLayer& fc2 = model.layers[static_cast<std::size_t>(2 + 2 * k)];
    Eigen::MatrixXd uz = (h * fc1.W.transpose()).rowwise() + fc1.b.transpose();
    Eigen::MatrixXd u = relu(uz);
    if (masks) u = u.cwiseProduct((*masks)[static_cast<std::size_t>(k + 1)]);
    Eigen::MatrixXd v = (u * fc2.W.transpose()).rowwise() + fc2.b.transpose();
    const Eigen::MatrixXd& proj = model.projections[static_cast<std::size_t>(k)];
    Eigen::MatrixXd skip = proj.size() > 0 ? (h * proj.transpose()).eval() : h;
    if (cache) {
      cache->push_back(h);
      cache->push_back(std::move(uz));
      cache->push_back(u);
    }
    h = skip + v;
  }
  if (cache) cache->push_back(h);
  const MlpLayer& out = model.layers.back();
  return (h * out.W.transpose()).rowwise() + out.b.transpose();
}

double loss_and_grad_impl(const MlpModel& model, const Eigen::MatrixXd& X, const Eigen::VectorXi& y,
                          double weight_decay, const Masks* masks, Gradients* grads) {
  const Eigen::Index n = X.rows();
  Eigen::VectorXd logits;
  std::vector<Eigen::MatrixXd> pre, post, cache;
  if (model.arch == MlpArch::kPlain)
    logits = forward_plain(model, X, masks, grads ? &pre : nullptr, grads ? &post : nullptr);
  else
    logits = forward_residual(model, X, masks, grads ? &cache : nullptr);

  double loss = 0.0;
  Eigen::VectorXd dz(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double yi = static_cast<double>(y[i]);
    loss += bce_with_logits(logits[i], yi);
    dz[i] = (sigmoid(logits[i]) - yi) / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);

  if (grads) {
    *grads = zero_like(model);
    if (model.arch == MlpArch::kPlain) {
      const std::size_t hidden = model.layers.size() - 1;
      const Eigen::MatrixXd& a_last = hidden > 0 ? post[hidden - 1] : X;
      grads->layers.back().W = dz.transpose() * a_last;
      grads->layers.back().b = Eigen::VectorXd::Constant(1, dz.sum());
      Eigen::MatrixXd da = dz * model.layers.back().W;
      for (std::size_t l = hidden; l-- > 0;) {
        if (masks) da = da.cwiseProduct((*masks)[l]);
        Eigen::MatrixXd dzl = da.cwiseProduct((pre[l].array() > 0.0).cast<double>().matrix());
        const Eigen::MatrixXd& a_in = l > 0 ? post[l - 1] : X;
        grads->layers[l].W = dzl.transpose() * a_in;
        grads->layers[l].b = dzl.colwise().sum().transpose();
        if (l > 0) da = dzl * model.layers[l].W;
      }
    } else {
      // cache: [z_in, a_in, (h_in, u_z, u) x blocks, h_final]
      const Eigen::MatrixXd& h_final = cache.back();
      grads->layers.back().W = dz.transpose() * h_final;
      grads->layers.back().b = Eigen::VectorXd::Constant(1, dz.sum());
      Eigen::MatrixXd dh = dz * model.layers.back().W;
      for (int k = model.n_blocks - 1; k >= 0; --k) {
        const std::size_t base = 2 + 3 * static_cast<std::size_t>(k);
        const Eigen::MatrixXd& h_in = cache[base];
        const Eigen::MatrixXd& uz = cache[base + 1];
        const Eigen::MatrixXd& u = cache[base + 2];
        const MlpLayer& fc1 = model.layers[static_cast<std::size_t>(1 + 2 * k)];
        const MlpLayer& fc2 = model.layers[static_cast<std::size_t>(2 + 2 * k)];
        const Eigen::MatrixXd& proj = model.projections[static_cast<std::size_t>(k)];

        Gradients& g = *grads;
        g.layers[static_cast<std::size_t>(2 + 2 * k)].W = dh.transpose() * u;
        g.layers[static_cast<std::size_t>(2 + 2 * k)].b = dh.colwise().sum().transpose();
        Eigen::MatrixXd du = dh * fc2.W;
        if (masks) du = du.cwiseProduct((*masks)[static_cast<std::size_t>(k + 1)]);
        Eigen::MatrixXd duz = du.cwiseProduct((uz.array() > 0.0).cast<double>().matrix());
        g.layers[static_cast<std::size_t>(1 + 2 * k)].W = duz.transpose() * h_in;
        g.layers[static_cast<std::size_t>(1 + 2 * k)].b = duz.colwise().sum().transpose();

        Eigen::MatrixXd dh_in = duz * fc1.W;
        if (proj.size() > 0) {
          g.projections[static_cast<std::size_t>(k)] = dh.transpose() * h_in;
          dh_in += dh * proj;
        } else {
          dh_in += dh;
        }
        dh = std::move(dh_in);
      }
      if (masks) dh = dh.cwiseProduct((*masks)[0]);
      Eigen::MatrixXd dz_in = dh.cwiseProduct((cache[0].array() > 0.0).cast<double>().matrix());
      grads->layers[0].W = dz_in.transpose() * X;
      grads->layers[0].b = dz_in.colwise().sum().transpose();
    }
  }

  if (weight_decay > 0.0) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      loss += 0.5 * weight_decay *
              (model.layers[l].W.squaredNorm() + model.layers[l].b.squaredNorm());
      if (grads) {
        grads->layers[l].W += weight_decay * model.layers[l].W;
        grads->layers[l].b += weight_decay * model.layers[l].b;
      }
    }
    for (std::size_t p = 0; p < model.projections.size(); ++p) {
      loss += 0.5 * weight_decay * model.projections[p].squaredNorm();
      if (grads) grads->projections[p] += weight_decay * model.projections[p];
    }
  }
  return loss;
}

Eigen::VectorXd flatten(const MlpModel& model, const Gradients& grads) {
  Eigen::Index total = 0;
  for (const MlpLayer& layer : model.layers) total += layer.W.size() + layer.b.size();
  for (const Eigen::MatrixXd& p : model.projections) total += p.size();
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  for (const MlpLayer& layer : grads.layers) {
    flat.segment(at, layer.W.size()) = Eigen::Map<const Eigen::VectorXd>(layer.W.data(), layer.W.size());
    at += layer.W.size();
    flat.segment(at, layer.b.size()) = layer.b;
    at += layer.b.size();
  }
  for (const Eigen::MatrixXd& p : grads.projections) {
    flat.segment(at, p.size()) = Eigen::Map<const Eigen::VectorXd>(p.data(), p.size());
    at += p.size();
  }
  return flat;
}

Masks draw_masks(const MlpModel& model, Eigen::Index batch_rows, Rng& rng) {
  Masks masks;
  if (model.dropout_rate <= 0.0) return masks;
  const double keep = 1.0 - model.dropout_rate;
  std::vector<Eigen::Index> widths;
  if (model.arch == MlpArch::kPlain) {
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l)
      widths.push_back(model.layers[l].W.rows());
  } else {
    widths.push_back(model.layers[0].W.rows());
    for (int k = 0; k < model.n_blocks; ++k)
      widths.push_back(model.layers[static_cast<std::size_t>(1 + 2 * k)].W.rows());
  }
  for (const Eigen::Index w : widths) {
    Eigen::MatrixXd mask(batch_rows, w);
    for (Eigen::Index i = 0; i < batch_rows; ++i)
      for (Eigen::Index j = 0; j < w; ++j) mask(i, j) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
    masks.push_back(std::move(mask));
  }
  return masks;
}

}  // namespace

MlpConfig plain_mlp_defaults() { return MlpConfig{}; }

MlpConfig residual_mlp_defaults() {
  MlpConfig config;
  config.arch = MlpArch::kResidual;
  config.dropout_rate = 0.0;
  config.max_epochs = 30;
  config.patience = 5;
  return config;
}

void MlpModel::validate() const {
  if (layers.empty()) throw ValidationError("network has no layers");
  if (layers.back().W.rows() != 1) throw ValidationError("output layer must emit one logit");
  if (layers.front().W.cols() != n_features)
    throw ValidationError("input layer expects " + std::to_string(layers.front().W.cols()) +
                          " features, model declares " + std::to_string(n_features));
  for (const MlpLayer& layer : layers)
    if (layer.b.size() != layer.W.rows())
      throw ValidationError("layer bias length does not match its output dimension");
  if (arch == MlpArch::kResidual) {
    if (layers.size() != static_cast<std::size_t>(2 + 2 * n_blocks))
      throw ValidationError("residual network must have 2 + 2*n_blocks layers");
    if (projections.size() != static_cast<std::size_t>(n_blocks))
      throw ValidationError("residual network needs one projection slot per block");
    for (int k = 0; k < n_blocks; ++k) {
      const auto& fc1 = layers[static_cast<std::size_t>(1 + 2 * k)];
      const auto& fc2 = layers[static_cast<std::size_t>(2 + 2 * k)];
      const auto& proj = projections[static_cast<std::size_t>(k)];
      if (fc2.W.cols() != fc1.W.rows()) throw ValidationError("block inner dimensions disagree");
      if (proj.size() == 0 && fc2.W.rows() != fc1.W.cols())
        throw ValidationError("block changes dimension without a projection");
      if (proj.size() > 0 && (proj.rows() != fc2.W.rows() || proj.cols() != fc1.W.cols()))
        throw ValidationError("projection shape does not bridge the block dimensions");
    }
  } else {
    for (std::size_t l = 0; l + 1 < layers.size(); ++l)
      if (layers[l + 1].W.cols() != layers[l].W.rows())
        throw ValidationError("adjacent layer dimensions disagree");
  }
}

Eigen::VectorXd MlpModel::predict_margin(const Eigen::MatrixXd& X) const {
  if (X.cols() != n_features)
    throw ValidationError("matrix has " + std::to_string(X.cols()) +
                          " columns but the model expects " + std::to_string(n_features));
  return arch == MlpArch::kPlain ? forward_plain(*this, X, nullptr, nullptr, nullptr)
                                 : forward_residual(*this, X, nullptr, nullptr);
}

Eigen::VectorXd MlpModel::predict_proba(const Eigen::MatrixXd& X) const {
  Eigen::VectorXd margin = predict_margin(X);
  for (Eigen::Index i = 0; i < margin.size(); ++i) margin[i] = sigmoid(margin[i]);
  return margin;
}

Eigen::MatrixXd residual_block_forward(const MlpModel& model, int block, const Eigen::MatrixXd& H) {
  if (model.arch != MlpArch::kResidual) throw ValidationError("model has no residual blocks");
  if (block < 0 || block >= model.n_blocks) throw ValidationError("block index out of range");
  const MlpLayer& fc1 = model.layers[static_cast<std::size_t>(1 + 2 * block)];
  const MlpLayer& fc2 = model.layers[static_cast<std::size_t>(2 + 2 * block)];
  const Eigen::MatrixXd u = relu(((H * fc1.W.transpose()).rowwise() + fc1.b.transpose()).eval());
  const Eigen::MatrixXd v = (u * fc2.W.transpose()).rowwise() + fc2.b.transpose();
  const Eigen::MatrixXd& proj = model.projections[static_cast<std::size_t>(block)];
  return proj.size() > 0 ? (H * proj.transpose() + v).eval() : (H + v).eval();
}

MlpModel make_mlp(int n_features, const MlpConfig& config, std::uint64_t init_seed) {
  if (n_features < 1) throw ValidationError("network needs at least one input feature");
  MlpModel model;
  model.arch = config.arch;
  model.dropout_rate = config.dropout_rate;
  model.n_features = n_features;

  std::vector<std::pair<int, int>> shapes;  // (out, in)
  if (config.arch == MlpArch::kPlain) {
    if (config.hidden_dims.empty()) throw ValidationError("plain network needs hidden layers");
    int in = n_features;
    for (const int width : config.hidden_dims) {
      if (width < 1) throw ValidationError("hidden layer width must be >= 1");
      shapes.emplace_back(width, in);
      in = width;
    }
    shapes.emplace_back(1, in);
  } else {
    if (config.n_blocks < 1) throw ValidationError("residual network needs at least one block");
    if (config.hidden_dim < 1) throw ValidationError("hidden dimension must be >= 1");
    model.n_blocks = config.n_blocks;
    shapes.emplace_back(config.hidden_dim, n_features);
    for (int k = 0; k < config.n_blocks; ++k) {
      shapes.emplace_back(config.hidden_dim, config.hidden_dim);
      shapes.emplace_back(config.hidden_dim, config.hidden_dim);
    }
    shapes.emplace_back(1, config.hidden_dim);
    model.projections.assign(static_cast<std::size_t>(config.n_blocks), Eigen::MatrixXd());
  }

  Rng rng(init_seed);
  for (const auto& [out, in] : shapes) {
    MlpLayer layer;
    layer.W.resize(out, in);
    const double std_dev = std::sqrt(2.0 / static_cast<double>(in));
    for (Eigen::Index i = 0; i < layer.W.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.W.cols(); ++j) layer.W(i, j) = std_dev * rng.normal();
    layer.b = Eigen::VectorXd::Zero(out);
    model.layers.push_back(std::move(layer));
  }
  model.validate();
  return model;
}

Eigen::VectorXd get_parameters(const MlpModel& model) {
  Eigen::Index total = 0;
  for (const MlpLayer& layer : model.layers) total += layer.W.size() + layer.b.size();
  for (const Eigen::MatrixXd& p : model.projections) total += p.size();
  Eigen::VectorXd flat(total);
  Eigen::Index at = 0;
  for (const MlpLayer& layer : model.layers) {
    flat.segment(at, layer.W.size()) =
        Eigen::Map<const Eigen::VectorXd>(layer.W.data(), layer.W.size());
    at += layer.W.size();
    flat.segment(at, layer.b.size()) = layer.b;
    at += layer.b.size();
  }
  for (const Eigen::MatrixXd& p : model.projections) {
    flat.segment(at, p.size()) = Eigen::Map<const Eigen::VectorXd>(p.data(), p.size());
    at += p.size();
  }
  return flat;
}

void set_parameters(MlpModel& model, const Eigen::VectorXd& theta) {
  Eigen::Index at = 0;
  for (MlpLayer& layer : model.layers) {
    Eigen::Map<Eigen::VectorXd>(layer.W.data(), layer.W.size()) = theta.segment(at, layer.W.size());
    at += layer.W.size();
    layer.b = theta.segment(at, layer.b.size());
    at += layer.b.size();
  }
  for (Eigen::MatrixXd& p : model.projections) {
    Eigen::Map<Eigen::VectorXd>(p.data(), p.size()) = theta.segment(at, p.size());
    at += p.size();
  }
  if (at != theta.size()) throw ValidationError("parameter vector length does not match the model");
}

double mlp_loss_and_gradient(const MlpModel& model, const Eigen::MatrixXd& X,
                             const Eigen::VectorXi& y, double weight_decay,
                             Eigen::VectorXd& gradient) {
  Gradients grads;
  const double loss = loss_and_grad_impl(model, X, y, weight_decay, nullptr, &grads);
  gradient = flatten(model, grads);
  return loss;
}

MlpModel train_mlp(const Eigen::MatrixXd& X, const Eigen::VectorXi& y, const MlpConfig& config) {
  if (X.rows() == 0) throw ValidationError("cannot train on an empty matrix");
  if (y.size() != X.rows()) throw ValidationError("label count does not match row count");
  if (!X.allFinite()) throw ValidationError("feature matrix contains non-finite values");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 0 && y[i] != 1) throw ValidationError("labels must be 0 or 1");
  if (config.learning_rate <= 0.0) throw ValidationError("learning_rate must be > 0");
  if (config.max_epochs < 1) throw ValidationError("max_epochs must be >= 1");
  if (config.patience < 1) throw ValidationError("patience must be >= 1");
  if (config.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (config.dropout_rate < 0.0 || config.dropout_rate >= 1.0)
    throw ValidationError("dropout_rate must be in [0, 1)");
  if (config.validation_fraction < 0.0 || config.validation_fraction >= 1.0)
    throw ValidationError("validation_fraction must be in [0, 1)");

  MlpModel model = make_mlp(static_cast<int>(X.cols()), config,
                            derive_seed(config.seed, kInitStream, 0));

  const Eigen::Index n = X.rows();
  std::vector<int> indices(static_cast<std::size_t>(n));
  std::iota(indices.begin(), indices.end(), 0);
  Eigen::Index n_val = 0;
  if (config.validation_fraction > 0.0 && n >= 2) {
    Rng split_rng(derive_seed(config.seed, kSplitStream, 0));
    split_rng.shuffle(indices);
    n_val = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(std::llround(config.validation_fraction * static_cast<double>(n))));
    n_val = std::min(n_val, n - 1);
  }
  std::vector<int> val_rows(indices.begin(), indices.begin() + n_val);
  std::vector<int> train_rows(indices.begin() + n_val, indices.end());

  Eigen::MatrixXd x_val(n_val, X.cols());
  Eigen::VectorXi y_val(n_val);
  for (Eigen::Index i = 0; i < n_val; ++i) {
    x_val.row(i) = X.row(val_rows[static_cast<std::size_t>(i)]);
    y_val[i] = y[val_rows[static_cast<std::size_t>(i)]];
  }

  Eigen::VectorXd theta = get_parameters(model);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(theta.size());
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  long step = 0;

  Eigen::VectorXd best_theta = theta;
  double best_val = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng order_rng(derive_seed(config.seed, kShuffleStream, static_cast<std::uint64_t>(epoch)));
    Rng mask_rng(derive_seed(config.seed, kDropoutStream, static_cast<std::uint64_t>(epoch)));
    order_rng.shuffle(train_rows);

    for (std::size_t start = 0; start < train_rows.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(train_rows.size(), start + static_cast<std::size_t>(config.batch_size));
      const Eigen::Index bsize = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd xb(bsize, X.cols());
      Eigen::VectorXi yb(bsize);
      for (Eigen::Index i = 0; i < bsize; ++i) {
        xb.row(i) = X.row(train_rows[start + static_cast<std::size_t>(i)]);
        yb[i] = y[train_rows[start + static_cast<std::size_t>(i)]];
      }

      const Masks masks = draw_masks(model, bsize, mask_rng);
      Gradients grads;
      const double loss = loss_and_grad_impl(model, xb, yb, config.weight_decay,
                                             masks.empty() ? nullptr : &masks, &grads);
      if (!std::isfinite(loss))
        throw ConvergenceError("training loss became non-finite at epoch " +
                                   std::to_string(epoch),
                               loss, epoch);

      const Eigen::VectorXd grad = flatten(model, grads);
      ++step;
      m = kBeta1 * m + (1.0 - kBeta1) * grad;
      v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
      const double mc = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double vc = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      theta -= (config.learning_rate / mc) *
               (m.array() / ((v.array() / vc).sqrt() + kEps)).matrix();
      set_parameters(model, theta);
    }

    if (n_val > 0) {
      const double val_loss = loss_and_grad_impl(model, x_val, y_val, 0.0, nullptr, nullptr);
      if (!std::isfinite(val_loss))
        throw ConvergenceError("validation loss became non-finite at epoch " +
                                   std::to_string(epoch),
                               val_loss, epoch);
      if (val_loss < best_val) {
        best_val = val_loss;
        best_theta = theta;
        stall = 0;
      } else if (++stall >= config.patience) {
        break;
      }
    } else {
      best_theta = theta;
    }
  }

  set_parameters(model, best_theta);
  return model;
}

}  // namespace ckdprog
