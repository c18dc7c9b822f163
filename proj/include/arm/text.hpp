#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace arm {

/// Field delimiter used by every serialized object.
inline constexpr std::string_view kFieldDelimiter = " | ";

/// Whitespace split, ASCII lowercase, leading/trailing punctuation stripped.
/// Tokens that become empty are dropped. Shared by N-gram extraction, BM25,
/// hashed embeddings and the decoder vocabulary so that they all agree.
std::vector<std::string> normalize_tokens(std::string_view text);

/// normalize_tokens joined by single spaces.
std::string normalize_text(std::string_view text);

/// Whitespace split only; case and punctuation preserved.
std::vector<std::string> raw_pieces(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string trim(std::string_view s);

std::set<std::string> token_set(std::string_view text);

/// |A∩B| / min(|A|,|B|); 0 when either set is empty.
double overlap_coefficient(const std::set<std::string>& a, const std::set<std::string>& b);

/// |A∩B| / |A∪B|; 0 when both are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// FNV-1a over the bytes, finished with a splitmix64 round. Stable across
/// platforms and runs (unlike std::hash).
std::uint64_t stable_hash(std::string_view s, std::uint64_t seed = 0);

std::uint64_t mix64(std::uint64_t x);

/// Fixed-precision decimal rendering used by reports.
std::string format_fixed(double value, int precision);

}  // namespace arm
