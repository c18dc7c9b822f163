#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "arm/ngram_index.hpp"

namespace arm {

using TokenId = std::uint32_t;

/// Reserved tokens. They never collide with content tokens, even when a
/// content piece has the same spelling as the display text.
enum class Special : TokenId {
  Eos = 0,
  Open,     // "(" opens an alignment segment
  Close,    // ")" closes it
  Sep,      // "," between n-grams of one list
  ListSep,  // "|" between keywords, lists and selected objects
  Stop,     // "<>" ends the selection
  Newline,  // "<nl>"
  Count
};

inline constexpr TokenId token(Special s) { return static_cast<TokenId>(s); }

/// Token text <-> id. Content tokens come either from normalize_tokens
/// (encode_text) or from raw whitespace pieces (encode_name).
class Vocabulary {
 public:
  Vocabulary();

  TokenId intern(std::string_view text);
  std::optional<TokenId> find(std::string_view text) const;
  /// Display text; specials render as "(", ")", ",", "|", "<>", "<nl>", "<eos>".
  const std::string& text(TokenId id) const { return texts_.at(id); }
  bool is_special(TokenId id) const { return id < token(Special::Count); }
  std::size_t size() const { return texts_.size(); }

  std::vector<TokenId> encode_text(std::string_view text);
  std::vector<TokenId> encode_name(std::string_view name);
  /// Space-joined display texts; "<nl>" becomes a newline.
  std::string detokenize(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> texts_;
  std::unordered_map<std::string, TokenId> content_;
};

/// Autoregressive scorer. Stateful implementations are owned by one decode at
/// a time. begin_call() marks the start of one model invocation.
class TokenScorer {
 public:
  virtual ~TokenScorer() = default;

  Vocabulary& vocab() { return vocab_; }
  const Vocabulary& vocab() const { return vocab_; }

  /// Next-token logits; the result has exactly vocab().size() finite entries.
  virtual std::vector<double> logits(std::span<const TokenId> context) = 0;

  void begin_call() { ++calls_; }
  std::size_t calls() const { return calls_; }

 protected:
  Vocabulary vocab_;

 private:
  std::size_t calls_ = 0;
};

/// Token sequence under construction, bound to a scorer's vocabulary.
class Context {
 public:
  explicit Context(Vocabulary& vocab) : vocab_(&vocab) {}

  Context& text(std::string_view t);
  Context& name(std::string_view n);
  Context& special(Special s);
  Context& append(std::span<const TokenId> ids);

  std::span<const TokenId> ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  Vocabulary& vocab() const { return *vocab_; }

 private:
  Vocabulary* vocab_;
  std::vector<TokenId> ids_;
};

struct MockOptions {
  double copy_bias = 1.0;         // every content token already in context
  double recency_bias = 0.5;      // content tokens among the last `recency_window`
  std::size_t recency_window = 12;
  double noise = 0.0;             // amplitude of seeded per-(context, token) jitter
  std::uint64_t seed = 0;
  double script_logit = 10.0;     // logit of the first scripted continuation
  double script_step = 1.0;       // decrement per rank
};

/// Deterministic scorer for offline runs. Unscripted logits are 0 plus copy
/// and recency bonuses; a scripted rule keyed on the context's trailing token
/// texts overrides the listed tokens with ranked logits (longest key wins).
class MockScorer final : public TokenScorer {
 public:
  explicit MockScorer(MockOptions options = {});

  void script(const std::vector<std::string>& after, const std::vector<std::string>& ranked);
  /// Registers one rule per step so the sequence is emitted after `after`.
  void script_sequence(const std::vector<std::string>& after,
                       const std::vector<std::string>& sequence);
  /// Array of {"after": str|[str], "then": [str]} or {"after": ..., "sequence": [str]}.
  void load_script(const nlohmann::json& rules);

  std::vector<double> logits(std::span<const TokenId> context) override;

  const MockOptions& options() const { return options_; }
  std::size_t rule_count() const { return rules_.size(); }

 private:
  static std::string key_of(std::span<const std::string> texts);
  std::uint64_t token_hash(TokenId id);

  MockOptions options_;
  std::unordered_map<std::string, std::vector<std::string>> rules_;
  std::size_t max_key_ = 0;
  std::vector<std::uint64_t> token_hashes_;
};

/// Arithmetic mean of the chosen-token logits of one n-gram.
double ngram_score(std::span<const double> logits);

struct NGramHit {
  NGram gram;
  double score = 0.0;
};

/// One constrained alignment segment "( g1, g2 )".
struct Beam {
  std::vector<TokenId> tokens;   // generated after "(" including "," and ")"
  std::vector<double> logits;    // chosen logit per generated token
  std::vector<NGramHit> ngrams;  // completed n-grams in emission order
  double score = 0.0;            // mean over `logits`
  bool finished = false;

  std::string render() const;
};

struct NGramDecodeOptions {
  std::size_t beam_width = 3;
  std::size_t max_ngrams = 3;
  /// A candidate whose logit trails the unconstrained best token by more than
  /// this is pruned. Infinite disables pruning.
  double prune_margin = std::numeric_limits<double>::infinity();
  /// Called after each step with the kept and pruned candidates.
  std::function<void(std::span<const Beam>, std::span<const Beam>)> observer;
};

/// Beam search inside "(" ... ")": content tokens follow trie edges, "," and
/// ")" are allowed only after a complete, not-yet-listed n-gram. `context`
/// should not include the "(" — it is appended here. Throws AllBeamsDead
/// (mentioning `label`) when nothing finishes.
std::vector<Beam> constrained_ngram_decode(TokenScorer& scorer, const NGramTrie& trie,
                                           std::span<const TokenId> context,
                                           const NGramDecodeOptions& options,
                                           std::string_view label = {});
std::vector<Beam> constrained_ngram_decode(TokenScorer& scorer, const NGramTrie& trie,
                                           std::string_view seed_text,
                                           const NGramDecodeOptions& options);

struct SequenceChoice {
  std::size_t index = 0;             // into the options
  std::vector<double> logits;        // chosen logits of the option's tokens
  std::vector<TokenId> emitted;      // tokens emitted, terminator included if used
};

/// Greedy decode masked to the union trie of `options`. When one option is a
/// strict prefix of another, `terminator` is offered to end the shorter one.
SequenceChoice choose_sequence(TokenScorer& scorer, std::span<const TokenId> context,
                               const std::vector<std::vector<TokenId>>& options,
                               TokenId terminator = token(Special::ListSep));

struct ChoiceResult {
  std::string chosen;
  std::vector<double> logits;
};

/// Output is always a member of `allowed` (tokenized as raw pieces).
ChoiceResult constrained_choice_decode(TokenScorer& scorer,
                                       const std::vector<std::string>& allowed,
                                       std::string_view prompt);

/// Unconstrained greedy generation until a stop token or `max_tokens`.
/// The stop token is not included in the result.
std::vector<TokenId> generate(TokenScorer& scorer, std::span<const TokenId> context,
                              std::span<const TokenId> stops, std::size_t max_tokens);

}  // namespace arm
