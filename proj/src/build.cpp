#include "mter/build.hpp"

#include <cmath>

namespace mter {

FeatureScoreTable aggregate_feature_scores(const IndexedCorpus& train) {
  FeatureScoreTable table;
  for (const auto& review : train.reviews) {
    for (const auto& t : review.tuples) {
      auto& cell = table[{review.user, review.item, t.feature}];
      cell.polarity_sum += t.polarity;
      cell.mentions += 1;
    }
  }
  return table;
}

double map_feature_score(int polarity_sum, int N) {
  return 1.0 + (N - 1) / (1.0 + std::exp(-static_cast<double>(polarity_sum)));
}

double map_phrase_frequency(int frequency, int N) {
  return 1.0 + (N - 1) * (2.0 / (1.0 + std::exp(-static_cast<double>(frequency))) - 1.0);
}

SparseTensor3 build_x(const FeatureScoreTable& scores, const IndexedCorpus& train) {
  const int p = train.p();
  const int N = train.rating_scale;
  SparseTensor3 x(train.m(), train.n(), p + 1);

  for (const auto& [key, cell] : scores) {
    auto [i, j, k] = key;
    x.add(i, j, k, map_feature_score(cell.polarity_sum, N));
  }

  std::map<std::pair<int, int>, int> ratings;
  for (const auto& review : train.reviews) {
    int& r = ratings[{review.user, review.item}];
    r = std::max(r, review.rating);
  }
  for (const auto& [key, rating] : ratings) x.add(key.first, key.second, p, rating);
  return x;
}

namespace {

SparseTensor3 build_phrase_tensor(const IndexedCorpus& train, bool by_user) {
  const int N = train.rating_scale;
  // (entity, feature, opinion) -> positive-mention frequency
  std::map<std::tuple<int, int, int>, int> freq;
  for (const auto& review : train.reviews) {
    int entity = by_user ? review.user : review.item;
    for (const auto& t : review.tuples)
      if (t.polarity > 0) freq[{entity, t.feature, t.opinion}]++;
  }
  SparseTensor3 y(by_user ? train.m() : train.n(), train.p(), train.q());
  for (const auto& [key, count] : freq) {
    auto [e, k, w] = key;
    y.add(e, k, w, map_phrase_frequency(count, N));
  }
  return y;
}

}  // namespace

SparseTensor3 build_yu(const IndexedCorpus& train) { return build_phrase_tensor(train, true); }
SparseTensor3 build_yi(const IndexedCorpus& train) { return build_phrase_tensor(train, false); }

PairOrderSet build_pair_sets(const IndexedCorpus& train) {
  PairOrderSet sets;
  sets.n_items = train.n();
  sets.per_user.resize(train.m());

  std::vector<std::map<int, int>> observed(train.m());
  for (const auto& review : train.reviews) {
    sets.user_of_review.push_back(review.user);
    int& r = observed[review.user][review.item];
    r = std::max(r, review.rating);
  }
  for (int u = 0; u < train.m(); ++u) {
    auto& up = sets.per_user[u];
    up.observed.assign(observed[u].begin(), observed[u].end());
    for (const auto& [j, rj] : up.observed)
      for (const auto& [l, rl] : up.observed)
        if (rj > rl) up.explicit_pairs.emplace_back(j, l);
  }
  return sets;
}

}  // namespace mter
