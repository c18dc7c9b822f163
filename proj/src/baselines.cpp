#include "arm/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "arm/text.hpp"

namespace arm {

double OverlapReranker::score(std::string_view question, const DataObject& object) const {
  return overlap_coefficient(token_set(question), token_set(serialize_object(object)));
}

namespace {

void sort_scored(std::vector<ScoredObject>& v) {
  std::stable_sort(v.begin(), v.end(), [](const ScoredObject& a, const ScoredObject& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
}

}  // namespace

std::vector<ScoredObject> dense_retrieve(std::span<const double> question_vec,
                                         const VectorStore& store, const Corpus& corpus,
                                         std::size_t top_k) {
  if (top_k == 0) throw std::invalid_argument("top_k must be at least 1");
  std::vector<ScoredObject> out;
  for (const auto& obj : corpus.objects()) {
    out.push_back({obj.id, object_similarity(store, question_vec, obj)});
  }
  sort_scored(out);
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

std::vector<ScoredObject> rerank_retrieve(std::string_view question,
                                          std::span<const double> question_vec,
                                          const VectorStore& store, const Corpus& corpus,
                                          const Reranker& reranker, std::size_t pool,
                                          std::size_t top_k) {
  if (pool < top_k) throw std::invalid_argument("rerank pool smaller than top_k");
  auto candidates = dense_retrieve(question_vec, store, corpus, pool);
  for (auto& c : candidates) c.score = reranker.score(question, corpus.object(c.id));
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.score > b.score; });
  if (candidates.size() > top_k) candidates.resize(top_k);
  return candidates;
}

DecompositionResult decomposed_retrieve(TokenScorer& scorer, std::string_view prompt,
                                        std::string_view question, const TextEmbeddings& emb,
                                        const VectorStore& store, const Corpus& corpus,
                                        const Reranker* reranker, std::size_t top_k,
                                        const DecompositionOptions& options) {
  DecompositionResult out;
  scorer.begin_call();
  out.llm_calls = 1;
  auto& vocab = scorer.vocab();
  const auto ctx = vocab.encode_text(prompt);
  const TokenId stops[] = {token(Special::Eos), token(Special::Stop)};
  const auto generated = generate(scorer, ctx, stops, options.max_tokens);

  std::vector<TokenId> line;
  auto flush = [&] {
    auto text = trim(vocab.detokenize(line));
    if (!text.empty() && out.sub_questions.size() < options.max_sub_questions) {
      out.sub_questions.push_back(std::move(text));
    }
    line.clear();
  };
  for (TokenId t : generated) {
    if (t == token(Special::Newline)) {
      flush();
    } else if (!vocab.is_special(t)) {
      line.push_back(t);
    }
  }
  flush();
  if (out.sub_questions.empty()) out.sub_questions.emplace_back(question);

  std::map<std::string, double> best_dense;
  for (const auto& sub : out.sub_questions) {
    for (const auto& hit : dense_retrieve(emb.get(sub), store, corpus, options.per_sub)) {
      auto [it, fresh] = best_dense.emplace(hit.id, hit.score);
      if (!fresh) it->second = std::max(it->second, hit.score);
    }
  }
  for (const auto& [id, dense] : best_dense) {
    out.objects.push_back({id, reranker ? reranker->score(question, corpus.object(id)) : dense});
  }
  sort_scored(out.objects);
  if (out.objects.size() > top_k) out.objects.resize(top_k);
  return out;
}

std::string_view to_string(AgentAction a) {
  switch (a) {
    case AgentAction::Search:
      return "search";
    case AgentAction::Finish:
      return "finish";
    case AgentAction::Malformed:
      return "malformed";
  }
  return "?";
}

std::string_view to_string(AgentStop s) {
  switch (s) {
    case AgentStop::Finish:
      return "finish";
    case AgentStop::IterationCap:
      return "iteration_cap";
    case AgentStop::Malformed:
      return "malformed";
  }
  return "?";
}

ParsedAction parse_action(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  const auto search = lower.find("search[");
  const auto finish = lower.find("finish[");
  ParsedAction out;
  if (search == std::string::npos && finish == std::string::npos) return out;
  const bool is_search = search != std::string::npos && (finish == std::string::npos || search < finish);
  const auto open = (is_search ? search : finish) + 7;
  const auto close = text.find(']', open);
  if (close == std::string::npos) return out;
  out.action = is_search ? AgentAction::Search : AgentAction::Finish;
  out.argument = trim(text.substr(open, close - open));
  if (out.action == AgentAction::Search && out.argument.empty()) out.action = AgentAction::Malformed;
  return out;
}

AgentResult agentic_retrieve(TokenScorer& scorer, std::string_view prompt, const SearchFn& search,
                             const Corpus& corpus, const AgentOptions& options) {
  if (options.max_iterations == 0) throw std::invalid_argument("max_iterations must be at least 1");
  AgentResult out;
  Context ctx(scorer.vocab());
  ctx.text(prompt);
  const TokenId stops[] = {token(Special::Newline), token(Special::Eos)};
  std::vector<std::string> seen;

  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    scorer.begin_call();
    const auto generated = generate(scorer, ctx.ids(), stops, options.max_tokens);
    ctx.append(generated).special(Special::Newline);
    AgentStep step;
    step.output = scorer.vocab().detokenize(generated);
    step.action = parse_action(step.output);
    const bool last = it == options.max_iterations;

    if (step.action.action == AgentAction::Finish) {
      out.transcript.steps.push_back(std::move(step));
      out.transcript.stop = AgentStop::Finish;
      break;
    }
    if (step.action.action == AgentAction::Malformed) {
      out.transcript.steps.push_back(std::move(step));
      out.transcript.stop = AgentStop::Malformed;
      break;
    }
    if (!last) {
      step.observation = search(step.action.argument, options.per_search);
      ctx.text("observation");
      for (const auto& id : step.observation) {
        ctx.name(id).text(serialize_object(corpus.object(id))).special(Special::Newline);
        if (std::find(seen.begin(), seen.end(), id) == seen.end()) seen.push_back(id);
      }
      out.objects_shown += step.observation.size();
    }
    out.transcript.steps.push_back(std::move(step));
  }
  out.retrieved = std::move(seen);
  out.llm_calls = out.transcript.iterations() - 1;
  return out;
}

}  // namespace arm
