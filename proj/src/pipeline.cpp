#include "arm/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <optional>

#include "arm/error.hpp"

namespace arm {

using nlohmann::json;

namespace {

constexpr std::pair<Method, std::string_view> kMethodNames[] = {
    {Method::Dense, "dense"},        {Method::Rerank, "rerank"}, {Method::DenseDecomp, "dense-decomp"},
    {Method::RerankDecomp, "rerank-decomp"}, {Method::React, "react"}, {Method::Arm, "arm"},
    {Method::ArmIA, "arm-ia"},       {Method::ArmSA, "arm-sa"}};

}  // namespace

std::string_view method_name(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (const auto& [method, n] : kMethodNames) {
    if (n == name) return method;
  }
  throw ConfigError("unknown method '" + std::string(name) + "'");
}

Engine::Engine(Config config, Corpus corpus, CorpusIndex index,
               std::shared_ptr<const EmbeddingProvider> provider)
    : config_(std::move(config)),
      corpus_(std::move(corpus)),
      index_(std::move(index)),
      provider_(std::move(provider)) {
  config_.validate();
  check_index_matches(index_, corpus_);
  store_ = embed_corpus(*provider_, corpus_);
  emb_ = std::make_unique<TextEmbeddings>(provider_);
  compat_ = std::make_unique<CompatibilityMatrix>(corpus_, *emb_, config_.w);
  prompts_ = load_prompts(config_.prompts);
  if (!config_.mock_script.empty()) {
    std::ifstream in(config_.mock_script);
    if (!in) throw ConfigError("cannot read mock script " + config_.mock_script.string());
    try {
      mock_script_ = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("mock script: " + std::string(e.what()));
    }
    MockScorer probe;
    probe.load_script(mock_script_);
  }
}

std::unique_ptr<Engine> Engine::open(const Config& config) {
  config.validate();
  if (config.corpus.empty()) throw ConfigError("no corpus configured");
  auto corpus = load_corpus(config.corpus, config.chunk_units);
  CorpusIndex index = config.index.empty()
                          ? build_index(corpus, Bm25Params{config.k1, config.b})
                          : load_index(config.index);
  std::shared_ptr<const EmbeddingProvider> provider =
      std::make_shared<HashEmbeddingProvider>(config.dim, config.seed);
  if (config.provider == "file") {
    provider = std::make_shared<FileEmbeddingProvider>(config.vectors, provider);
  }
  return std::make_unique<Engine>(config, std::move(corpus), std::move(index), std::move(provider));
}

std::unique_ptr<TokenScorer> Engine::make_scorer() const {
  MockOptions options = config_.mock;
  options.seed = config_.seed;
  auto scorer = std::make_unique<MockScorer>(options);
  if (!mock_script_.is_null()) scorer->load_script(mock_script_);
  return scorer;
}

ArmOutcome Engine::run_arm(TokenScorer& scorer, std::string_view question) const {
  ArmOutcome out;
  const std::size_t calls_before = scorer.calls();
  scorer.begin_call();

  const TemplateVars vars{{"user_question", std::string(question)}};
  Context ctx(scorer.vocab());
  ctx.text(render_template(prompts_.keywords, vars));
  out.keywords = extract_keywords(scorer, ctx, question);

  NGramDecodeOptions decode;
  decode.beam_width = config_.beam_width;
  decode.max_ngrams = config_.max_ngrams;
  decode.prune_margin = config_.prune_margin;
  std::size_t beams = 1;
  for (const auto& kw : out.keywords) {
    auto alignment = align_keyword(scorer, index_.trie, ctx.ids(), kw, decode);
    ctx.text(kw);
    if (!alignment.lists.empty()) ctx.append(alignment.lists.front().tokens);
    ctx.special(Special::ListSep);
    beams = std::max(beams, alignment.lists.size());
    out.alignments.push_back(std::move(alignment));
  }
  ctx.special(Special::Newline);

  const std::string q(question);
  const Vector& qvec = emb_->get(q);
  std::map<std::string, double> rel;
  auto relevance_of = [&](const std::string& id) {
    auto it = rel.find(id);
    if (it == rel.end()) it = rel.emplace(id, relevance(store_, qvec, corpus_.object(id))).first;
    return it->second;
  };
  const FusionParams fusion{config_.alpha, config_.base_size, FusionParams{}.bm25_depth};
  const auto [verify_before, verify_after] = render_around(prompts_.verify, vars, "draft");

  std::vector<BeamSelection> selections;
  for (std::size_t b = 0; b < beams; ++b) {
    std::vector<KeywordAlignment> per_beam;
    for (const auto& a : out.alignments) {
      KeywordAlignment pick{a.keyword, {}};
      if (!a.lists.empty()) pick.lists.push_back(a.lists[std::min(b, a.lists.size() - 1)]);
      per_beam.push_back(std::move(pick));
    }
    out.bases.push_back(retrieve_base(qvec, per_beam, index_.bm25, corpus_, store_, fusion));
    const auto base_ids = out.bases.back().ids();
    for (auto& set : expand_base(base_ids, *compat_, config_.expansions)) {
      ArmBranch br;
      br.beam = b;
      br.strategy = set.strategy;
      const std::size_t k = std::min(config_.mip_k, set.ids.size());
      br.instance = build_instance(set, relevance_of, *compat_, k);
      br.search = std::move(set);
      br.draft = solve_mip(br.instance);
      attach_connections(br.draft, *compat_);
      br.rendered = serialize_draft(br.draft, qvec, store_, corpus_, *emb_);

      Context branch = ctx;
      branch.text(verify_before);
      append_draft(branch, br.rendered);
      branch.text(verify_after);
      br.selection = verify_select(scorer, branch, br.rendered, out.branches.size());
      selections.push_back(br.selection);
      out.branches.push_back(std::move(br));
    }
  }

  const auto& first_base = out.bases.front().entries;
  for (std::size_t i = 0; i < first_base.size() && i < config_.final_k; ++i) {
    out.after_ia.push_back(first_base[i].object_id);
  }
  const ArmBranch* best = &out.branches.front();
  for (const auto& br : out.branches) {
    if (br.draft.objective > best->draft.objective) best = &br;
  }
  for (const auto& o : best->rendered.objects) {
    if (out.after_sa.size() == config_.final_k) break;
    out.after_sa.push_back(o.id);
  }
  out.confidence = aggregate(selections, config_.lambda);
  out.final = finalize(out.confidence, config_.final_k);
  out.llm_calls = scorer.calls() - calls_before;
  return out;
}

RetrievalResult Engine::retrieve(std::string_view question, Method method) const {
  auto scorer = make_scorer();
  return retrieve(*scorer, question, method);
}

RetrievalResult Engine::retrieve(TokenScorer& scorer, std::string_view question,
                                 Method method) const {
  RetrievalResult r;
  r.method = method;
  const std::string q(question);
  const TemplateVars vars{{"user_question", q}};
  auto take = [&](const std::vector<ScoredObject>& objs) {
    for (const auto& o : objs) {
      r.ids.push_back(o.id);
      r.scores.push_back(o.score);
    }
    r.objects_provided = r.ids.size();
  };
  const OverlapReranker reranker;
  const std::size_t calls_before = scorer.calls();
  std::optional<std::size_t> counted_calls;

  switch (method) {
    case Method::Dense:
      take(dense_retrieve(emb_->get(q), store_, corpus_, config_.top_k));
      break;
    case Method::Rerank:
      take(rerank_retrieve(q, emb_->get(q), store_, corpus_, reranker,
                           std::max(config_.rerank_pool, config_.top_k), config_.top_k));
      break;
    case Method::DenseDecomp:
    case Method::RerankDecomp: {
      DecompositionOptions opts;
      opts.per_sub = config_.decomp_per_sub;
      opts.max_sub_questions = config_.decomp_max_sub_questions;
      auto d = decomposed_retrieve(scorer, render_template(prompts_.decompose, vars), q, *emb_,
                                   store_, corpus_,
                                   method == Method::RerankDecomp ? &reranker : nullptr,
                                   config_.top_k, opts);
      take(d.objects);
      r.details["sub_questions"] = d.sub_questions;
      break;
    }
    case Method::React: {
      AgentOptions opts;
      opts.max_iterations = config_.react_max_iterations;
      opts.per_search = config_.react_per_search;
      SearchFn search = [&](const std::string& query, std::size_t k) {
        std::vector<std::string> ids;
        for (const auto& o : dense_retrieve(emb_->get(query), store_, corpus_, k)) {
          ids.push_back(o.id);
        }
        return ids;
      };
      auto a = agentic_retrieve(scorer, render_template(prompts_.react, vars), search, corpus_, opts);
      r.ids = a.retrieved;
      r.scores.assign(r.ids.size(), 1.0);
      r.objects_provided = a.objects_shown;
      json steps = json::array();
      for (const auto& s : a.transcript.steps) {
        steps.push_back({{"output", s.output},
                         {"action", to_string(s.action.action)},
                         {"argument", s.action.argument},
                         {"observation", s.observation}});
      }
      r.details["steps"] = std::move(steps);
      r.details["stop"] = to_string(a.transcript.stop);
      r.details["iterations"] = a.transcript.iterations();
      counted_calls = a.llm_calls;
      break;
    }
    case Method::Arm:
    case Method::ArmIA:
    case Method::ArmSA: {
      auto outcome = run_arm(scorer, question);
      const auto& ids = method == Method::ArmIA   ? outcome.after_ia
                        : method == Method::ArmSA ? outcome.after_sa
                                                  : outcome.final;
      r.ids = ids;
      for (const auto& id : ids) {
        double score = 0.0;
        if (method == Method::Arm) {
          for (const auto& c : outcome.confidence.entries) {
            if (c.id == id) score = c.confidence;
          }
        } else {
          score = 1.0;
        }
        r.scores.push_back(score);
      }
      r.objects_provided = r.ids.size();
      r.details = arm_details(outcome);
      break;
    }
  }
  r.llm_calls = counted_calls.value_or(scorer.calls() - calls_before);
  return r;
}

namespace {

json locator_json(const Locator& loc) {
  if (const auto* c = std::get_if<ColumnRef>(&loc)) return {{"column", c->column}};
  if (const auto* c = std::get_if<CellRef>(&loc)) return {{"row", c->row}, {"column", c->column}};
  return {{"sentence", std::get<SentenceRef>(loc).sentence}};
}

}  // namespace

json arm_details(const ArmOutcome& o) {
  json j;
  j["keywords"] = o.keywords;
  j["alignments"] = json::array();
  for (const auto& a : o.alignments) {
    json lists = json::array();
    for (const auto& l : a.lists) {
      json grams = json::array();
      for (const auto& g : l.ngrams) grams.push_back({{"text", g.gram.text()}, {"score", g.score}});
      lists.push_back({{"ngrams", grams}, {"score", l.score}});
    }
    j["alignments"].push_back({{"keyword", a.keyword}, {"lists", lists}});
  }
  j["bases"] = json::array();
  for (const auto& base : o.bases) {
    json entries = json::array();
    for (const auto& e : base.entries) {
      entries.push_back({{"id", e.object_id}, {"fused", e.fused}, {"bm25", e.bm25}, {"embed", e.embed}});
    }
    j["bases"].push_back(entries);
  }
  j["branches"] = json::array();
  for (const auto& br : o.branches) {
    json links = json::array();
    for (const auto& l : br.draft.links) {
      json link = {{"a", l.a}, {"b", l.b}, {"score", l.score}};
      if (l.connection) {
        link["connection"] = {{"kind", to_string(l.connection->kind)},
                              {"a", {{"id", l.connection->a.object_id},
                                     {"at", locator_json(l.connection->a.locator)}}},
                              {"b", {{"id", l.connection->b.object_id},
                                     {"at", locator_json(l.connection->b.locator)}}}};
      }
      links.push_back(std::move(link));
    }
    j["branches"].push_back(
        {{"beam", br.beam},
         {"strategy", {br.strategy.per_step, br.strategy.steps}},
         {"search_set", br.search.ids},
         {"draft", {{"objects", br.draft.objects}, {"links", links}, {"objective", br.draft.objective}}},
         {"connections", br.rendered.connections},
         {"selection", {{"ids", br.selection.ids}, {"weights", br.selection.weights}}}});
  }
  j["confidence"] = json::array();
  for (const auto& c : o.confidence.entries) {
    j["confidence"].push_back({{"id", c.id},
                               {"votes", c.votes},
                               {"avg_weight", c.avg_weight},
                               {"weight_norm", c.weight_norm},
                               {"count_norm", c.count_norm},
                               {"confidence", c.confidence}});
  }
  j["after_ia"] = o.after_ia;
  j["after_sa"] = o.after_sa;
  j["final"] = o.final;
  return j;
}

}  // namespace arm
