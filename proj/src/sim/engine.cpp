#include "engine.hpp"

#include <algorithm>

namespace adnet::detail {

void SumTree::reset(std::size_t leaves) {
  leaves_ = leaves;
  width_ = 1;
  while (width_ < leaves) width_ *= 2;
  tree_.assign(2 * width_, 0.0);
}

void SumTree::rebuild() {
  for (std::size_t node = width_ - 1; node >= 1; --node)
    tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
}

void SumTree::set(std::size_t i, double v) {
  std::size_t node = width_ + i;
  tree_[node] = v;
  for (node /= 2; node >= 1; node /= 2) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
}

std::size_t SumTree::find(double u) const {
  std::size_t node = 1;
  while (node < width_) {
    const double left = tree_[2 * node];
    if (u < left) {
      node = 2 * node;
    } else {
      u -= left;
      node = 2 * node + 1;
    }
  }
  std::size_t i = node - width_;
  // Roundoff can land on an empty leaf at the right end.
  while (tree_[width_ + i] <= 0.0 && i > 0) --i;
  if (tree_[width_ + i] <= 0.0) {
    for (i = 0; i < leaves_ && tree_[width_ + i] <= 0.0; ++i) {
    }
  }
  return i;
}

void ClassMembers::reset(std::size_t classes, std::size_t max_id) {
  members_.assign(classes, {});
  pos_.assign(max_id, 0);
  class_of_.assign(max_id, 0);
}

void ClassMembers::insert(std::uint32_t id, std::size_t c) {
  class_of_[id] = static_cast<std::uint32_t>(c);
  pos_[id] = static_cast<std::uint32_t>(members_[c].size());
  members_[c].push_back(id);
}

bool ClassMembers::move(std::uint32_t id, std::size_t c) {
  const std::size_t old = class_of_[id];
  if (old == c) return false;
  auto& from = members_[old];
  const std::uint32_t last = from.back();
  from[pos_[id]] = last;
  pos_[last] = pos_[id];
  from.pop_back();
  insert(id, c);
  return true;
}

EdgeEngine::EdgeEngine(const ValidatedModel& model, const NetworkState& state)
    : spec_(&model.edge),
      n_(state.n),
      G_(state.G),
      E_(state.E),
      F_(state.G * state.E),
      symmetric_(state.symmetric),
      autonomous_(model.edge.mode == EdgeMode::Autonomous),
      self_(state.include_self_edges) {
  exit_.resize(E_ * G_ * G_);
  for (std::size_t b = 0; b < E_; ++b)
    for (std::size_t sj = 0; sj < G_; ++sj)
      for (std::size_t sk = 0; sk < G_; ++sk)
        exit_[(b * G_ + sj) * G_ + sk] = spec_->exit_rate(b, sj, sk);
  sigma_ = state.sigma;
  counts_.assign(n_ * F_, 0);
  scratch_.resize(F_);
  members_.reset(n_ * E_, n_ * n_);
  for (std::size_t j = 0; j < n_; ++j)
    for (std::size_t k = 0; k < n_; ++k) {
      if (!in_row(j, k)) continue;
      const State b = state.edge(j, k);
      ++counts_[j * F_ + b * G_ + state.sigma[k]];
      members_.insert(static_cast<std::uint32_t>(j * n_ + k), j * E_ + b);
    }
  tree_.reset(n_);
  for (std::size_t j = 0; j < n_; ++j) tree_.stage(j, row_total(j));
  tree_.rebuild();
}

double EdgeEngine::row_total(std::size_t j) const {
  const std::int32_t* c = counts_.data() + j * F_;
  const double* e = exit_.data() + source_state(j) * G_;
  double total = 0.0;
  for (std::size_t b = 0; b < E_; ++b)
    for (std::size_t sk = 0; sk < G_; ++sk)
      total += static_cast<double>(c[b * G_ + sk]) * e[b * G_ * G_ + sk];
  return total;
}

EdgeEngine::Pick EdgeEngine::sample(Rng& rng) const {
  const std::size_t j = tree_.find(rng.uniform() * tree_.total());
  const State sj = source_state(j);
  std::vector<double>& weights = scratch_;
  for (std::size_t b = 0; b < E_; ++b)
    for (std::size_t sk = 0; sk < G_; ++sk)
      weights[b * G_ + sk] = static_cast<double>(counts_[j * F_ + b * G_ + sk]) *
                             exit_[(b * G_ + sj) * G_ + sk];
  const std::size_t cls = rng.categorical(weights);
  const std::size_t b = cls / G_, sk = cls % G_;
  // counts_ > 0 for the drawn class, so some member of list b has target state sk.
  const std::size_t list = j * E_ + b;
  std::uint32_t id;
  do {
    id = members_.member(list, rng.index(members_.size(list)));
  } while (sigma_[id % n_] != sk);
  Pick p;
  p.j = static_cast<std::uint32_t>(j);
  p.k = id % static_cast<std::uint32_t>(n_);
  p.from = static_cast<State>(b);
  double u = rng.uniform() * exit_[(b * G_ + sj) * G_ + sk];
  State to = p.from;
  for (std::size_t a = 0; a < E_; ++a) {
    if (a == b) continue;
    const double r = spec_->rate(b, a, sj, sk);
    if (r <= 0.0) continue;
    to = static_cast<State>(a);
    if (u < r) break;
    u -= r;
  }
  p.to = to;
  return p;
}

void EdgeEngine::edge_changed(const NetworkState& state, std::size_t j, std::size_t k) {
  if (symmetric_ && j > k) std::swap(j, k);
  const auto id = static_cast<std::uint32_t>(j * n_ + k);
  const std::size_t old_list = members_.class_of(id);
  const State b = static_cast<State>(old_list - j * E_), a = state.edge(j, k);
  if (a == b) return;
  members_.move(id, j * E_ + a);
  --counts_[j * F_ + b * G_ + sigma_[k]];
  ++counts_[j * F_ + a * G_ + sigma_[k]];
  tree_.set(j, row_total(j));
}

void EdgeEngine::node_changed(const NetworkState& state, std::size_t k) {
  const State old = sigma_[k], now = state.sigma[k];
  if (old == now) return;
  sigma_[k] = now;
  for (std::size_t j = 0; j < n_; ++j) {
    if (!in_row(j, k)) continue;
    std::int32_t* c = counts_.data() + j * F_ + state.edge(j, k) * G_;
    --c[old];
    ++c[now];
  }
  for (std::size_t j = 0; j < n_; ++j) tree_.stage(j, row_total(j));
  tree_.rebuild();
}

}  // namespace adnet::detail
