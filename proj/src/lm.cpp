#include "arm/lm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "arm/error.hpp"
#include "arm/text.hpp"

namespace arm {

// --- vocabulary ---------------------------------------------------------------

Vocabulary::Vocabulary() : texts_{"<eos>", "(", ")", ",", "|", "<>", "<nl>"} {}

TokenId Vocabulary::intern(std::string_view text) {
  std::string key(text);
  if (auto it = content_.find(key); it != content_.end()) return it->second;
  const auto id = static_cast<TokenId>(texts_.size());
  texts_.push_back(key);
  content_.emplace(std::move(key), id);
  return id;
}

std::optional<TokenId> Vocabulary::find(std::string_view text) const {
  auto it = content_.find(std::string(text));
  if (it == content_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocabulary::encode_text(std::string_view text) {
  std::vector<TokenId> out;
  for (const auto& tok : normalize_tokens(text)) out.push_back(intern(tok));
  return out;
}

std::vector<TokenId> Vocabulary::encode_name(std::string_view name) {
  std::vector<TokenId> out;
  for (const auto& piece : raw_pieces(name)) out.push_back(intern(piece));
  return out;
}

std::string Vocabulary::detokenize(std::span<const TokenId> ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == token(Special::Newline)) {
      out += '\n';
      continue;
    }
    if (!out.empty() && out.back() != '\n') out += ' ';
    out += text(ids[i]);
  }
  return out;
}

// --- context ------------------------------------------------------------------

Context& Context::text(std::string_view t) {
  auto ids = vocab_->encode_text(t);
  ids_.insert(ids_.end(), ids.begin(), ids.end());
  return *this;
}

Context& Context::name(std::string_view n) {
  auto ids = vocab_->encode_name(n);
  ids_.insert(ids_.end(), ids.begin(), ids.end());
  return *this;
}

Context& Context::special(Special s) {
  ids_.push_back(token(s));
  return *this;
}

Context& Context::append(std::span<const TokenId> ids) {
  ids_.insert(ids_.end(), ids.begin(), ids.end());
  return *this;
}

// --- mock scorer --------------------------------------------------------------

MockScorer::MockScorer(MockOptions options) : options_(options) {}

std::string MockScorer::key_of(std::span<const std::string> texts) {
  std::string key;
  for (const auto& t : texts) {
    key += t;
    key += '\x1f';
  }
  return key;
}

void MockScorer::script(const std::vector<std::string>& after,
                        const std::vector<std::string>& ranked) {
  for (const auto& t : ranked) {
    // Make sure scripted tokens exist so logits() can address them.
    bool special = false;
    for (TokenId s = 0; s < token(Special::Count); ++s) special |= vocab_.text(s) == t;
    if (!special) vocab_.intern(t);
  }
  rules_[key_of(after)] = ranked;
  max_key_ = std::max(max_key_, after.size());
}

void MockScorer::script_sequence(const std::vector<std::string>& after,
                                 const std::vector<std::string>& sequence) {
  std::vector<std::string> key = after;
  for (const auto& t : sequence) {
    script(key, {t});
    key.push_back(t);
  }
}

void MockScorer::load_script(const nlohmann::json& rules) {
  if (!rules.is_array()) throw ConfigError("mock script must be a JSON array");
  for (const auto& rule : rules) {
    std::vector<std::string> after;
    const auto& a = rule.at("after");
    if (a.is_string()) {
      after = raw_pieces(a.get<std::string>());
    } else {
      after = a.get<std::vector<std::string>>();
    }
    if (rule.contains("then")) {
      script(after, rule.at("then").get<std::vector<std::string>>());
    } else if (rule.contains("sequence")) {
      script_sequence(after, rule.at("sequence").get<std::vector<std::string>>());
    } else {
      throw ConfigError("mock script rule needs 'then' or 'sequence'");
    }
  }
}

std::uint64_t MockScorer::token_hash(TokenId id) {
  while (token_hashes_.size() <= id) {
    token_hashes_.push_back(stable_hash(vocab_.text(static_cast<TokenId>(token_hashes_.size()))));
  }
  return token_hashes_[id];
}

std::vector<double> MockScorer::logits(std::span<const TokenId> context) {
  const std::size_t v = vocab_.size();
  std::vector<double> out(v, 0.0);

  std::vector<char> seen(v, 0);
  for (TokenId id : context) {
    if (id < v && !vocab_.is_special(id) && !seen[id]) {
      seen[id] = 1;
      out[id] += options_.copy_bias;
    }
  }
  std::fill(seen.begin(), seen.end(), 0);
  const std::size_t start =
      context.size() > options_.recency_window ? context.size() - options_.recency_window : 0;
  for (std::size_t i = start; i < context.size(); ++i) {
    const TokenId id = context[i];
    if (id < v && !vocab_.is_special(id) && !seen[id]) {
      seen[id] = 1;
      out[id] += options_.recency_bias;
    }
  }

  if (options_.noise != 0.0) {
    std::uint64_t ctx = mix64(options_.seed);
    const std::size_t tail = std::min<std::size_t>(context.size(), 4);
    for (std::size_t i = context.size() - tail; i < context.size(); ++i) {
      ctx = mix64(ctx ^ token_hash(context[i]));
    }
    for (TokenId id = 0; id < v; ++id) {
      const double u = static_cast<double>(mix64(ctx ^ token_hash(id)) >> 11) * 0x1.0p-53;
      out[id] += options_.noise * u;
    }
  }

  if (!rules_.empty()) {
    std::vector<std::string> tail;
    const std::size_t n = std::min(max_key_, context.size());
    for (std::size_t i = context.size() - n; i < context.size(); ++i) {
      tail.push_back(vocab_.text(context[i]));
    }
    for (std::size_t len = n + 1; len-- > 0;) {
      auto it = rules_.find(key_of(std::span(tail).last(len)));
      if (it == rules_.end()) continue;
      for (std::size_t r = 0; r < it->second.size(); ++r) {
        const double value = options_.script_logit - options_.script_step * static_cast<double>(r);
        const auto& t = it->second[r];
        for (TokenId s = 0; s < token(Special::Count); ++s) {
          if (vocab_.text(s) == t) out[s] = value;
        }
        if (auto id = vocab_.find(t)) out[*id] = value;
      }
      break;
    }
  }
  return out;
}

// --- n-gram decoding ----------------------------------------------------------

double ngram_score(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("ngram_score of an empty segment");
  return std::accumulate(logits.begin(), logits.end(), 0.0) / static_cast<double>(logits.size());
}

std::string Beam::render() const {
  std::vector<std::string> grams;
  for (const auto& hit : ngrams) grams.push_back(hit.gram.text());
  return "( " + join(grams, ", ") + " )";
}

namespace {

struct Hyp {
  Beam beam;
  std::vector<std::string> prefix;  // tokens of the n-gram in progress
};

double mean(const std::vector<double>& xs) {
  return xs.empty() ? 0.0
                    : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Score desc, then token spellings asc so the order never depends on ids.
bool better(const Beam& a, const Beam& b, const Vocabulary& vocab) {
  if (a.score != b.score) return a.score > b.score;
  return std::lexicographical_compare(
      a.tokens.begin(), a.tokens.end(), b.tokens.begin(), b.tokens.end(),
      [&](TokenId x, TokenId y) { return vocab.text(x) < vocab.text(y); });
}

bool pick_better(TokenId a, double la, TokenId b, double lb, const Vocabulary& vocab) {
  if (la != lb) return la > lb;
  const auto& ta = vocab.text(a);
  const auto& tb = vocab.text(b);
  if (ta != tb) return ta < tb;
  return a < b;
}

void complete_ngram(Hyp& h) {
  const auto n = h.prefix.size();
  std::span<const double> tail(h.beam.logits.data() + h.beam.logits.size() - n, n);
  h.beam.ngrams.push_back(NGramHit{NGram{h.prefix}, ngram_score(tail)});
  h.prefix.clear();
}

bool already_listed(const Hyp& h) {
  return std::any_of(h.beam.ngrams.begin(), h.beam.ngrams.end(),
                     [&](const NGramHit& hit) { return hit.gram.tokens == h.prefix; });
}

}  // namespace

std::vector<Beam> constrained_ngram_decode(TokenScorer& scorer, const NGramTrie& trie,
                                           std::span<const TokenId> context,
                                           const NGramDecodeOptions& options,
                                           std::string_view label) {
  if (trie.empty()) throw std::invalid_argument("constrained decoding needs a non-empty trie");
  if (options.beam_width == 0 || options.max_ngrams == 0) {
    throw std::invalid_argument("beam width and max n-grams must be >= 1");
  }
  auto& vocab = scorer.vocab();
  std::vector<TokenId> base(context.begin(), context.end());
  base.push_back(token(Special::Open));

  std::vector<Hyp> hyps(1);
  while (std::any_of(hyps.begin(), hyps.end(), [](const Hyp& h) { return !h.beam.finished; })) {
    std::vector<Hyp> cands;
    for (auto& h : hyps) {
      if (h.beam.finished) {
        cands.push_back(h);
        continue;
      }
      std::vector<TokenId> opts;
      std::vector<std::string> opt_text;
      if (h.prefix.size() < kMaxNGram) {
        for (auto& next : trie.valid_continuations(h.prefix).next) {
          opts.push_back(vocab.intern(next));
          opt_text.push_back(std::move(next));
        }
      }
      const auto here = trie.valid_continuations(h.prefix);
      if (here.can_terminate && !already_listed(h)) {
        if (h.beam.ngrams.size() + 1 < options.max_ngrams) {
          opts.push_back(token(Special::Sep));
          opt_text.emplace_back();
        }
        opts.push_back(token(Special::Close));
        opt_text.emplace_back();
      }
      if (opts.empty()) continue;  // dead end

      std::vector<TokenId> ctx = base;
      ctx.insert(ctx.end(), h.beam.tokens.begin(), h.beam.tokens.end());
      const auto logits = scorer.logits(ctx);
      if (logits.size() != vocab.size()) throw std::logic_error("scorer returned wrong logit count");
      const double best_any = *std::max_element(logits.begin(), logits.end());

      for (std::size_t i = 0; i < opts.size(); ++i) {
        const double l = logits[opts[i]];
        if (l < best_any - options.prune_margin) continue;
        Hyp child = h;
        child.beam.tokens.push_back(opts[i]);
        child.beam.logits.push_back(l);
        if (opts[i] == token(Special::Sep)) {
          complete_ngram(child);
        } else if (opts[i] == token(Special::Close)) {
          complete_ngram(child);
          child.beam.finished = true;
        } else {
          child.prefix.push_back(opt_text[i]);
        }
        child.beam.score = mean(child.beam.logits);
        cands.push_back(std::move(child));
      }
    }
    if (cands.empty()) {
      throw AllBeamsDead("no valid continuation while aligning '" + std::string(label) + "'");
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [&](const Hyp& a, const Hyp& b) { return better(a.beam, b.beam, vocab); });
    const std::size_t keep = std::min(options.beam_width, cands.size());
    if (options.observer) {
      std::vector<Beam> kept, pruned;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        (i < keep ? kept : pruned).push_back(cands[i].beam);
      }
      options.observer(kept, pruned);
    }
    cands.resize(keep);
    hyps = std::move(cands);
  }
  std::vector<Beam> out;
  for (auto& h : hyps) out.push_back(std::move(h.beam));
  return out;
}

std::vector<Beam> constrained_ngram_decode(TokenScorer& scorer, const NGramTrie& trie,
                                           std::string_view seed_text,
                                           const NGramDecodeOptions& options) {
  const auto ctx = scorer.vocab().encode_text(seed_text);
  return constrained_ngram_decode(scorer, trie, ctx, options, seed_text);
}

// --- choice decoding ----------------------------------------------------------

SequenceChoice choose_sequence(TokenScorer& scorer, std::span<const TokenId> context,
                               const std::vector<std::vector<TokenId>>& options,
                               TokenId terminator) {
  if (options.empty()) throw std::invalid_argument("choose_sequence needs at least one option");
  for (const auto& o : options) {
    if (o.empty()) throw std::invalid_argument("choose_sequence option has no tokens");
  }
  const auto& vocab = scorer.vocab();
  std::vector<TokenId> ctx(context.begin(), context.end());
  std::vector<std::size_t> active(options.size());
  std::iota(active.begin(), active.end(), 0);
  SequenceChoice out;

  for (std::size_t pos = 0;; ++pos) {
    std::optional<std::size_t> complete;
    bool longer = false;
    std::set<TokenId> allowed;
    for (auto i : active) {
      if (options[i].size() == pos) {
        if (!complete) complete = i;
      } else {
        longer = true;
        allowed.insert(options[i][pos]);
      }
    }
    if (complete && !longer) {
      out.index = *complete;
      return out;
    }
    if (complete) allowed.insert(terminator);

    const auto logits = scorer.logits(ctx);
    if (logits.size() != vocab.size()) throw std::logic_error("scorer returned wrong logit count");
    TokenId pick = *allowed.begin();
    for (TokenId t : allowed) {
      if (pick_better(t, logits[t], pick, logits[pick], vocab)) pick = t;
    }
    ctx.push_back(pick);
    out.emitted.push_back(pick);
    if (complete && pick == terminator &&
        std::none_of(active.begin(), active.end(), [&](std::size_t i) {
          return options[i].size() > pos && options[i][pos] == terminator;
        })) {
      out.index = *complete;
      return out;
    }
    out.logits.push_back(logits[pick]);
    std::erase_if(active, [&](std::size_t i) {
      return options[i].size() <= pos || options[i][pos] != pick;
    });
  }
}

ChoiceResult constrained_choice_decode(TokenScorer& scorer, const std::vector<std::string>& allowed,
                                       std::string_view prompt) {
  if (allowed.empty()) throw std::invalid_argument("constrained choice needs allowed strings");
  auto& vocab = scorer.vocab();
  std::vector<std::vector<TokenId>> options;
  for (const auto& s : allowed) {
    auto ids = vocab.encode_name(s);
    if (ids.empty()) throw std::invalid_argument("allowed string without tokens");
    options.push_back(std::move(ids));
  }
  const auto ctx = vocab.encode_text(prompt);
  auto pick = choose_sequence(scorer, ctx, options);
  return ChoiceResult{allowed[pick.index], std::move(pick.logits)};
}

std::vector<TokenId> generate(TokenScorer& scorer, std::span<const TokenId> context,
                              std::span<const TokenId> stops, std::size_t max_tokens) {
  const auto& vocab = scorer.vocab();
  std::vector<TokenId> ctx(context.begin(), context.end());
  std::vector<TokenId> out;
  while (out.size() < max_tokens) {
    const auto logits = scorer.logits(ctx);
    if (logits.empty()) break;
    TokenId pick = 0;
    for (TokenId t = 1; t < logits.size(); ++t) {
      if (pick_better(t, logits[t], pick, logits[pick], vocab)) pick = t;
    }
    if (std::find(stops.begin(), stops.end(), pick) != stops.end()) break;
    out.push_back(pick);
    ctx.push_back(pick);
  }
  return out;
}

}  // namespace arm
