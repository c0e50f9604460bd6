// Copyright 2026 The past Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "eval/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "core/errors.h"

namespace past {

// ---------------------------------------------------------------------------
// PNMI

JointCountTable JointCountTable::Build(std::span<const int32_t> tokens,
                                       std::span<const int32_t> phones) {
  PAST_REQUIRE(tokens.size() == phones.size(), kArgument,
               "token and phone sequences differ in length");
  PAST_REQUIRE(!tokens.empty(), kArgument, "PNMI needs at least one frame");
  JointCountTable t;
  std::set<int32_t> tok(tokens.begin(), tokens.end());
  std::set<int32_t> ph(phones.begin(), phones.end());
  t.token_ids.assign(tok.begin(), tok.end());
  t.phone_ids.assign(ph.begin(), ph.end());
  std::map<int32_t, size_t> row, col;
  for (size_t i = 0; i < t.token_ids.size(); ++i) row[t.token_ids[i]] = i;
  for (size_t j = 0; j < t.phone_ids.size(); ++j) col[t.phone_ids[j]] = j;
  t.counts.assign(t.token_ids.size() * t.phone_ids.size(), 0);
  t.token_totals.assign(t.token_ids.size(), 0);
  t.phone_totals.assign(t.phone_ids.size(), 0);
  for (size_t i = 0; i < tokens.size(); ++i) {
    const size_t r = row[tokens[i]], c = col[phones[i]];
    ++t.counts[r * t.phone_ids.size() + c];
    ++t.token_totals[r];
    ++t.phone_totals[c];
  }
  t.total = static_cast<int64_t>(tokens.size());
  return t;
}

double Pnmi(const JointCountTable& table) {
  const double n = static_cast<double>(table.total);
  double h_y = 0.0;
  for (int64_t c : table.phone_totals) {
    if (c == 0) continue;
    const double p = c / n;
    h_y -= p * std::log(p);
  }
  PAST_REQUIRE(h_y > 0.0, kArgument,
               "phone labels have zero entropy (a single phone); PNMI undefined");
  std::vector<double> contributions(table.token_ids.size(), 0.0);
  for (size_t r = 0; r < table.token_ids.size(); ++r) {
    const double px = table.token_totals[r] / n;
    double sum = 0.0;
    for (size_t c = 0; c < table.phone_ids.size(); ++c) {
      const int64_t k = table.at(r, c);
      if (k == 0) continue;
      const double pxy = k / n;
      const double py = table.phone_totals[c] / n;
      sum += pxy * std::log(pxy / (px * py));
    }
    contributions[r] = sum;
  }
  std::sort(contributions.begin(), contributions.end());
  double mi = 0.0;
  for (double v : contributions) mi += v;
  return std::clamp(mi / h_y, 0.0, 1.0);
}

double Pnmi(std::span<const int32_t> tokens, std::span<const int32_t> phones) {
  return Pnmi(JointCountTable::Build(tokens, phones));
}

std::vector<int32_t> PermuteTokens(std::span<const int32_t> tokens,
                                   const std::map<int32_t, int32_t>& permutation) {
  std::set<int32_t> images;
  for (const auto& [from, to] : permutation) images.insert(to);
  PAST_REQUIRE(images.size() == permutation.size(), kArgument,
               "token permutation is not injective");
  std::set<int32_t> domain;
  for (const auto& [from, to] : permutation) domain.insert(from);
  PAST_REQUIRE(domain == images, kArgument,
               "token permutation must map its id set onto itself");
  std::vector<int32_t> out(tokens.size());
  for (size_t i = 0; i < tokens.size(); ++i) {
    auto it = permutation.find(tokens[i]);
    PAST_REQUIRE(it != permutation.end(), kArgument,
                 "token " + std::to_string(tokens[i]) + " not covered by permutation");
    out[i] = it->second;
  }
  return out;
}

// ---------------------------------------------------------------------------
// ABX

double AngularDistance(std::span<const float> u, std::span<const float> v) {
  PAST_REQUIRE(u.size() == v.size(), kArgument, "frame dimensions differ");
  if (std::equal(u.begin(), u.end(), v.begin())) return 0.0;
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += static_cast<double>(u[i]) * v[i];
    nu += static_cast<double>(u[i]) * u[i];
    nv += static_cast<double>(v[i]) * v[i];
  }
  if (nu == 0.0 || nv == 0.0) return 0.5;
  const double cosine = std::clamp(dot / std::sqrt(nu * nv), -1.0, 1.0);
  return std::acos(cosine) / M_PI;
}

double DtwDistance(const LatentSequence& a, const LatentSequence& b) {
  PAST_REQUIRE(a.frames > 0 && b.frames > 0, kArgument, "DTW on an empty segment");
  PAST_REQUIRE(a.channels == b.channels, kArgument, "DTW segments differ in channels");
  const int n = a.frames, m = b.frames;
  std::vector<std::vector<float>> fa(n), fb(m);
  for (int i = 0; i < n; ++i) fa[i] = a.Frame(i);
  for (int j = 0; j < m; ++j) fb[j] = b.Frame(j);
  std::vector<double> cost(static_cast<size_t>(n) * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) cost[i * m + j] = AngularDistance(fa[i], fb[j]);
  // best[i][j][len]: minimum total cost of a path from (0,0) to (i,j) that
  // visits exactly len cells.
  const int max_len = n + m - 1;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<size_t>(n) * m * (max_len + 1), inf);
  auto cell = [&](int i, int j, int len) -> double& {
    return best[(static_cast<size_t>(i) * m + j) * (max_len + 1) + len];
  };
  cell(0, 0, 1) = cost[0];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == 0 && j == 0) continue;
      for (int len = 2; len <= i + j + 1; ++len) {
        double prev = inf;
        if (i > 0) prev = std::min(prev, cell(i - 1, j, len - 1));
        if (j > 0) prev = std::min(prev, cell(i, j - 1, len - 1));
        if (i > 0 && j > 0) prev = std::min(prev, cell(i - 1, j - 1, len - 1));
        if (prev < inf) cell(i, j, len) = prev + cost[i * m + j];
      }
    }
  }
  double result = inf;
  for (int len = std::max(n, m); len <= max_len; ++len) {
    const double total = cell(n - 1, m - 1, len);
    if (total < inf) result = std::min(result, total / len);
  }
  return result;
}

double AbxTripletError(const AbxTriplet& t) {
  const double dax = DtwDistance(t.a, t.x);
  const double dbx = DtwDistance(t.b, t.x);
  if (dax > dbx) return 1.0;
  if (dax == dbx) return 0.5;
  return 0.0;
}

double AbxError(std::span<const AbxTriplet> triplets, AbxMode mode) {
  PAST_REQUIRE(!triplets.empty(), kArgument, "ABX needs at least one triplet");
  double errors = 0.0;
  for (const AbxTriplet& t : triplets) {
    PAST_REQUIRE(t.category_a != t.category_b, kArgument,
                 "ABX triplet A and B share a category");
    PAST_REQUIRE(t.speaker_a == t.speaker_b, kArgument,
                 "ABX triplet A and B must come from one speaker");
    if (mode == AbxMode::kWithin) {
      PAST_REQUIRE(t.speaker_x == t.speaker_a, kArgument,
                   "within-speaker triplet has X from another speaker");
    } else {
      PAST_REQUIRE(t.speaker_x != t.speaker_a, kArgument,
                   "across-speaker triplet has X from the A/B speaker");
    }
    errors += AbxTripletError(t);
  }
  return errors / static_cast<double>(triplets.size());
}

// ---------------------------------------------------------------------------
// SISNR

double Sisnr(std::span<const float> reference, std::span<const float> estimate) {
  PAST_REQUIRE(reference.size() == estimate.size(), kArgument,
               "SISNR inputs differ in length");
  PAST_REQUIRE(!reference.empty(), kArgument, "SISNR on empty signals");
  const size_t n = reference.size();
  long double mean_r = 0, mean_e = 0;
  for (size_t i = 0; i < n; ++i) {
    mean_r += reference[i];
    mean_e += estimate[i];
  }
  mean_r /= n;
  mean_e /= n;
  long double dot = 0, energy = 0;
  for (size_t i = 0; i < n; ++i) {
    const long double r = reference[i] - mean_r, e = estimate[i] - mean_e;
    dot += r * e;
    energy += r * r;
  }
  PAST_REQUIRE(energy > 0, kArgument, "SISNR target has zero energy");
  const long double scale = dot / energy;
  long double target = 0, noise = 0;
  for (size_t i = 0; i < n; ++i) {
    const long double r = reference[i] - mean_r, e = estimate[i] - mean_e;
    const long double s = scale * r;
    target += s * s;
    noise += (e - s) * (e - s);
  }
  if (noise <= 0) return kSisnrClampDb;
  if (target <= 0) return -kSisnrClampDb;
  const double db = static_cast<double>(10.0L * std::log10(target / noise));
  return std::clamp(db, -kSisnrClampDb, kSisnrClampDb);
}

// ---------------------------------------------------------------------------
// Edit distance

std::vector<std::string> SplitWords(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> words;
  std::string w;
  while (is >> w) words.push_back(w);
  return words;
}

namespace {

template <typename Seq>
size_t EditDistance(const Seq& hyp, const Seq& ref) {
  std::vector<size_t> prev(ref.size() + 1), cur(ref.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (size_t i = 1; i <= hyp.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= ref.size(); ++j) {
      const size_t sub = prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[ref.size()];
}

}  // namespace

size_t Levenshtein(std::span<const std::string> hyp, std::span<const std::string> ref) {
  return EditDistance(hyp, ref);
}

size_t Levenshtein(const std::string& hyp, const std::string& ref) {
  return EditDistance(hyp, ref);
}

double ErrorRate(const std::string& hyp, const std::string& ref, ErrorUnit unit) {
  if (unit == ErrorUnit::kChar) {
    PAST_REQUIRE(!ref.empty(), kArgument, "error rate against an empty reference");
    return static_cast<double>(Levenshtein(hyp, ref)) / ref.size();
  }
  const auto h = SplitWords(hyp), r = SplitWords(ref);
  PAST_REQUIRE(!r.empty(), kArgument, "error rate against an empty reference");
  return static_cast<double>(Levenshtein(std::span<const std::string>(h),
                                         std::span<const std::string>(r))) /
         r.size();
}

}  // namespace past
