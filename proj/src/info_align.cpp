#include "arm/info_align.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <tuple>

#include "arm/error.hpp"
#include "arm/text.hpp"

namespace arm {

std::vector<std::string> extract_keywords(TokenScorer& scorer, Context& ctx,
                                          std::string_view question) {
  const auto words = normalize_tokens(question);
  if (words.empty()) throw std::invalid_argument("extract_keywords: empty question");
  auto& vocab = scorer.vocab();
  std::vector<TokenId> ids;
  for (const auto& w : words) ids.push_back(vocab.intern(w));

  enum class Act { Start, Extend, Split, End };
  struct Move {
    Act act;
    std::size_t pos = 0;
  };

  std::vector<std::string> keywords;
  std::size_t cursor = 0;
  bool open = false;
  std::size_t kw_begin = 0;
  std::size_t kw_end = 0;  // inclusive
  auto close_keyword = [&] {
    keywords.push_back(join({words.begin() + static_cast<std::ptrdiff_t>(kw_begin),
                             words.begin() + static_cast<std::ptrdiff_t>(kw_end + 1)},
                            " "));
    cursor = kw_end + 1;
    open = false;
  };

  for (;;) {
    std::map<TokenId, Move> allowed;
    if (!open) {
      for (std::size_t p = cursor; p < ids.size(); ++p) allowed.emplace(ids[p], Move{Act::Start, p});
    } else if (kw_end + 1 < ids.size()) {
      allowed.emplace(ids[kw_end + 1], Move{Act::Extend, kw_end + 1});
      allowed.emplace(token(Special::ListSep), Move{Act::Split});
    }
    allowed.emplace(token(Special::Newline), Move{Act::End});

    const auto logits = scorer.logits(ctx.ids());
    // Ties go to the earliest start position, then to the token text.
    auto rank = [&](const auto& entry) {
      const bool start = entry.second.act == Act::Start;
      return std::make_tuple(!start, start ? entry.second.pos : 0, vocab.text(entry.first));
    };
    auto pick = allowed.begin();
    for (auto it = allowed.begin(); it != allowed.end(); ++it) {
      const double a = logits[it->first];
      const double b = logits[pick->first];
      if (a > b || (a == b && rank(*it) < rank(*pick))) pick = it;
    }
    const TokenId tok = pick->first;
    const Move move = pick->second;
    ctx.append(std::span(&tok, 1));
    switch (move.act) {
      case Act::Start:
        open = true;
        kw_begin = kw_end = move.pos;
        break;
      case Act::Extend:
        kw_end = move.pos;
        break;
      case Act::Split:
        close_keyword();
        break;
      case Act::End:
        if (open) close_keyword();
        if (keywords.empty()) keywords.push_back(join(words, " "));
        return keywords;
    }
  }
}

std::vector<std::string> extract_keywords(TokenScorer& scorer, std::string_view question) {
  Context ctx(scorer.vocab());
  ctx.text("question").text(question).text("keywords");
  return extract_keywords(scorer, ctx, question);
}

std::vector<std::string> AlignedList::query_terms() const {
  std::vector<std::string> out;
  for (const auto& hit : ngrams) out.insert(out.end(), hit.gram.tokens.begin(), hit.gram.tokens.end());
  return out;
}

KeywordAlignment align_keyword(TokenScorer& scorer, const NGramTrie& trie,
                               std::span<const TokenId> ctx, std::string_view keyword,
                               const NGramDecodeOptions& options) {
  KeywordAlignment out;
  out.keyword = std::string(keyword);
  std::vector<TokenId> full(ctx.begin(), ctx.end());
  auto kw = scorer.vocab().encode_text(keyword);
  full.insert(full.end(), kw.begin(), kw.end());
  std::vector<Beam> beams;
  try {
    beams = constrained_ngram_decode(scorer, trie, full, options, keyword);
  } catch (const AllBeamsDead&) {
    return out;
  }
  for (auto& beam : beams) {
    AlignedList list;
    list.score = beam.score;
    list.tokens.push_back(token(Special::Open));
    list.tokens.insert(list.tokens.end(), beam.tokens.begin(), beam.tokens.end());
    list.ngrams = std::move(beam.ngrams);
    std::stable_sort(list.ngrams.begin(), list.ngrams.end(),
                     [](const NGramHit& a, const NGramHit& b) { return a.score > b.score; });
    out.lists.push_back(std::move(list));
  }
  return out;
}

KeywordAlignment align_keyword(TokenScorer& scorer, const NGramTrie& trie,
                               std::string_view keyword, const NGramDecodeOptions& options) {
  return align_keyword(scorer, trie, std::span<const TokenId>{}, keyword, options);
}

std::vector<std::string> BaseSet::ids() const {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.object_id);
  return out;
}

BaseSet fuse_components(std::vector<BaseEntry> entries, double alpha, std::size_t base_size) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0, 1]");
  for (auto& e : entries) e.fused = alpha * e.bm25 + (1.0 - alpha) * e.embed;
  std::sort(entries.begin(), entries.end(), [](const BaseEntry& a, const BaseEntry& b) {
    if (a.fused != b.fused) return a.fused > b.fused;
    return a.object_id < b.object_id;
  });
  if (entries.size() > base_size) entries.resize(base_size);
  return BaseSet{std::move(entries)};
}

BaseSet retrieve_base(std::span<const double> question_vec,
                      const std::vector<KeywordAlignment>& alignments, const Bm25Index& bm25,
                      const Corpus& corpus, const VectorStore& store, const FusionParams& params) {
  std::map<std::string, double> lexical;
  for (const auto& alignment : alignments) {
    for (const auto& list : alignment.lists) {
      const auto terms = list.query_terms();
      if (terms.empty()) continue;
      for (const auto& hit : bm25.search(terms, std::max<std::size_t>(params.bm25_depth, 1))) {
        const auto& oid = corpus.chunks().at(hit.chunk).object_id;
        auto [it, fresh] = lexical.emplace(oid, hit.score);
        if (!fresh) it->second = std::max(it->second, hit.score);
      }
    }
  }
  double lo = 0.0, hi = 0.0;
  if (!lexical.empty()) {
    auto [mn, mx] = std::minmax_element(lexical.begin(), lexical.end(),
                                        [](auto& a, auto& b) { return a.second < b.second; });
    lo = mn->second;
    hi = mx->second;
  }

  std::vector<BaseEntry> entries;
  entries.reserve(corpus.objects().size());
  for (const auto& obj : corpus.objects()) {
    BaseEntry e;
    e.object_id = obj.id;
    if (auto it = lexical.find(obj.id); it != lexical.end()) {
      e.bm25 = hi > lo ? (it->second - lo) / (hi - lo) : 1.0;
    }
    e.embed = std::clamp(object_similarity(store, question_vec, obj), 0.0, 1.0);
    entries.push_back(std::move(e));
  }
  return fuse_components(std::move(entries), params.alpha, params.base_size);
}

BaseSet retrieve_base(std::string_view question, const std::vector<KeywordAlignment>& alignments,
                      const Bm25Index& bm25, const Corpus& corpus, const VectorStore& store,
                      const EmbeddingProvider& provider, const FusionParams& params) {
  const auto q = provider.embed(question);
  return retrieve_base(q, alignments, bm25, corpus, store, params);
}

}  // namespace arm
