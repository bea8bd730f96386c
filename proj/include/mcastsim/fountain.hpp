#pragma once

#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "mcastsim/rng.hpp"

namespace mcast {

// A rateless-coded unit. Payloads are never materialized: the packet is its
// identifiers plus the GF(2) generator row combining the session's Q data
// packets, and the row is reproducible from (seed, session, supertime, index)
// alone.
struct CodedPacket {
  int session = 0;
  long supertime = 0;
  int index = 0;
  int q = 1;
  std::vector<std::uint64_t> row;  // Q bits, little-endian words, non-zero
};

inline int row_words(int q) { return (q + 63) / 64; }

// Uniform non-zero Q-bit vector keyed by the packet identifiers.
inline std::vector<std::uint64_t> generator_row(std::uint64_t seed, int session,
                                                long supertime, int q, int index) {
  if (q < 1) throw std::invalid_argument("generator_row: q must be >= 1");
  const int words = row_words(q);
  const std::uint64_t top_mask =
      (q % 64 == 0) ? ~0ULL : ((1ULL << (q % 64)) - 1);
  std::vector<std::uint64_t> row(words);
  std::uint64_t state = mix_seed(seed, static_cast<std::uint64_t>(session),
                                 static_cast<std::uint64_t>(supertime),
                                 static_cast<std::uint64_t>(index));
  for (;;) {
    bool nonzero = false;
    for (int w = 0; w < words; ++w) {
      row[w] = splitmix64(state);
      if (w == words - 1) row[w] &= top_mask;
      nonzero |= row[w] != 0;
    }
    if (nonzero) return row;  // rejection keeps the law uniform over non-zero
  }
}

inline std::vector<CodedPacket> encode(std::uint64_t seed, int session, long supertime,
                                       int q, int count) {
  if (q < 1) throw std::invalid_argument("encode: q must be >= 1");
  if (count < 1) throw std::invalid_argument("encode: count must be >= 1");
  std::vector<CodedPacket> out;
  out.reserve(count);
  for (int index = 0; index < count; ++index) {
    out.push_back({session, supertime, index, q,
                   generator_row(seed, session, supertime, q, index)});
  }
  return out;
}

// Incremental GF(2) rank tracker for one (destination, session) pair.
// Ingest is idempotent in the coded index; rank never decreases.
class DecoderState {
 public:
  DecoderState(int session, int q)
      : session_(session), q_(q), pivot_rows_(q), has_pivot_(q, 0) {
    if (q < 1) throw std::invalid_argument("DecoderState: q must be >= 1");
  }

  int session() const { return session_; }
  int q() const { return q_; }
  int rank() const { return rank_; }
  int received_count() const { return static_cast<int>(received_.size()); }
  bool has_received(int index) const { return received_.count(index) > 0; }
  bool can_decode() const { return rank_ == q_; }

  void ingest(const CodedPacket& packet) {
    if (packet.session != session_)
      throw std::invalid_argument("ingest: packet belongs to a different session");
    if (packet.q != q_)
      throw std::invalid_argument("ingest: Q mismatch, corrupted configuration");
    if (!received_.insert(packet.index).second) return;  // duplicate index
    reduce(packet.row);
  }

 private:
  void reduce(std::vector<std::uint64_t> row) {
    for (;;) {
      int pivot = highest_bit(row);
      if (pivot < 0) return;  // dependent row
      if (!has_pivot_[pivot]) {
        pivot_rows_[pivot] = std::move(row);
        has_pivot_[pivot] = 1;
        ++rank_;
        return;
      }
      const auto& basis = pivot_rows_[pivot];
      for (std::size_t w = 0; w < row.size(); ++w) row[w] ^= basis[w];
    }
  }

  static int highest_bit(const std::vector<std::uint64_t>& row) {
    for (int w = static_cast<int>(row.size()) - 1; w >= 0; --w) {
      if (row[w] != 0) return w * 64 + 63 - __builtin_clzll(row[w]);
    }
    return -1;
  }

  int session_;
  int q_;
  int rank_ = 0;
  std::unordered_set<int> received_;
  std::vector<std::vector<std::uint64_t>> pivot_rows_;
  std::vector<std::uint8_t> has_pivot_;
};

}  // namespace mcast
