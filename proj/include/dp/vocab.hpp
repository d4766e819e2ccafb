#pragma once

#include <string>
#include <vector>

#include "dp/common.hpp"

namespace dp {

// Closed 18-token vocabulary for scene descriptions. Ids are stable and
// contiguous; BOS = 0, EOS = 1.
namespace tok {
inline constexpr int BOS = 0;
inline constexpr int EOS = 1;
inline constexpr int NONE = 2;
inline constexpr int SEP = 3;
inline constexpr int CAR = 4;
inline constexpr int PED = 5;
inline constexpr int CYCLIST = 6;
inline constexpr int AHEAD = 7;
inline constexpr int BEHIND = 8;
inline constexpr int LEFT = 9;
inline constexpr int RIGHT = 10;
inline constexpr int NEAR = 11;
inline constexpr int MID = 12;
inline constexpr int FAR = 13;
inline constexpr int APPROACHING = 14;
inline constexpr int RECEDING = 15;
inline constexpr int CROSSING = 16;
inline constexpr int STATIC = 17;
}  // namespace tok

inline constexpr int kVocabSize = 18;
inline constexpr int kMaxDescLen = 24;  // whole sequence including BOS/EOS

inline const char* token_name(int id) {
  static const char* names[kVocabSize] = {
      "BOS",  "EOS",   "NONE",  "SEP",  "CAR",  "PED",         "CYCLIST",  "AHEAD",  "BEHIND",
      "LEFT", "RIGHT", "NEAR",  "MID",  "FAR",  "APPROACHING", "RECEDING", "CROSSING", "STATIC"};
  if (id < 0 || id >= kVocabSize) throw DataError("token id out of range");
  return names[id];
}

using Description = std::vector<int>;

// Grammar: BOS, then either the single token NONE or 1+ clauses of exactly
// (class, side, distance, motion) separated by SEP, then EOS.
inline bool description_valid(const Description& d) {
  const size_t n = d.size();
  if (n < 3 || n > kMaxDescLen) return false;
  if (d.front() != tok::BOS || d.back() != tok::EOS) return false;
  for (size_t i = 1; i + 1 < n; ++i)
    if (d[i] == tok::BOS || d[i] == tok::EOS) return false;
  if (n == 3) return d[1] == tok::NONE;
  const size_t body = n - 2;
  if ((body + 1) % 5 != 0) return false;  // clauses of 4 + separating SEPs
  const size_t clauses = (body + 1) / 5;
  auto in = [](int v, int lo, int hi) { return v >= lo && v <= hi; };
  for (size_t c = 0; c < clauses; ++c) {
    const size_t base = 1 + c * 5;
    if (!in(d[base], tok::CAR, tok::CYCLIST)) return false;
    if (!in(d[base + 1], tok::AHEAD, tok::RIGHT)) return false;
    if (!in(d[base + 2], tok::NEAR, tok::FAR)) return false;
    if (!in(d[base + 3], tok::APPROACHING, tok::STATIC)) return false;
    if (c + 1 < clauses && d[base + 4] != tok::SEP) return false;
  }
  return true;
}

inline std::string description_text(const Description& d) {
  std::string out;
  for (size_t i = 0; i < d.size(); ++i) {
    if (i) out += ' ';
    out += token_name(d[i]);
  }
  return out;
}

}  // namespace dp
