#include "arm/planted.hpp"

#include <set>
#include <stdexcept>

#include "arm/text.hpp"

namespace arm {

std::vector<GoldQuestion> PlantedBench::gold() const {
  std::vector<GoldQuestion> out;
  for (const auto& q : questions) out.push_back(q.gold);
  return out;
}

namespace {

class WordSource {
 public:
  explicit WordSource(std::uint64_t seed) : state_(seed) {}

  std::string fresh() {
    static constexpr std::string_view consonants = "bdfgklmnprstvz";
    static constexpr std::string_view vowels = "aeiou";
    for (;;) {
      std::string w;
      for (int s = 0; s < 3; ++s) {
        w += consonants[next() % consonants.size()];
        w += vowels[next() % vowels.size()];
      }
      if (used_.insert(w).second) return w;
    }
  }

  std::string capitalized() {
    auto w = fresh();
    w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  }

  std::string phrase(std::size_t n) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + fresh();
    return out;
  }

 private:
  std::uint64_t next() { return mix64(state_++); }

  std::uint64_t state_;
  std::set<std::string> used_;
};

std::string two_digits(std::size_t i) {
  return (i < 10 ? "0" : "") + std::to_string(i);
}

}  // namespace

PlantedBench generate_planted(const PlantedOptions& o) {
  if (o.rows == 0 || o.shared_codes > o.rows || o.questions == 0 || o.passage_every == 0) {
    throw std::invalid_argument("planted benchmark options out of range");
  }
  WordSource words(o.seed);
  PlantedBench bench;

  for (std::size_t q = 0; q < o.questions; ++q) {
    const std::string tag = two_digits(q);
    const std::string unique = words.fresh();
    const std::string t1 = words.fresh();
    const std::string t2 = words.fresh();
    const std::string join_header = words.phrase(3);

    DataObject a;
    a.id = "a" + tag;
    a.kind = ObjectKind::Table;
    a.title = unique + " " + t1 + " " + t2;
    a.description = "Entries for " + unique + " " + t1 + " " + t2;
    a.columns = {join_header, t1 + " " + t2};
    std::vector<std::string> codes;
    for (std::size_t r = 0; r < o.rows; ++r) {
      codes.push_back(words.phrase(2));
      a.rows.push_back({codes.back(), words.phrase(2)});
    }

    DataObject b;
    b.id = "b" + tag;
    b.kind = ObjectKind::Table;
    b.title = words.phrase(2);
    b.columns = {join_header, words.phrase(2)};
    std::vector<std::string> names;
    for (std::size_t r = 0; r < o.rows; ++r) {
      const std::string code = r < o.shared_codes ? codes[r] : words.phrase(2);
      names.push_back(words.capitalized() + " " + words.capitalized());
      b.rows.push_back({code, names.back()});
    }

    PlantedQuestion pq;
    pq.matched_table = a.id;
    pq.bridge_table = b.id;
    pq.gold.question_id = "q" + tag;
    pq.gold.question = "Which " + unique + " " + t1 + " " + t2 + "?";
    pq.gold.gold_object_ids = {a.id, b.id};
    bench.objects.push_back(std::move(a));
    bench.objects.push_back(std::move(b));

    if (q % o.passage_every == 0) {
      DataObject d;
      d.id = "d" + tag;
      d.kind = ObjectKind::Passage;
      d.title = unique + " " + t1 + " " + t2;
      d.sentences = {names[q % o.rows] + " " + words.fresh() + " " + unique + " " + t1 + " " + t2 + "."};
      pq.linked_passage = d.id;
      pq.gold.gold_object_ids.push_back(d.id);
      bench.objects.push_back(std::move(d));
    }
    bench.questions.push_back(std::move(pq));
  }

  return bench;
}

std::vector<std::string> check_planted(const PlantedBench& bench) {
  std::vector<std::string> problems;
  Corpus corpus(bench.objects);
  for (const auto& q : bench.questions) {
    for (const auto& id : q.gold.gold_object_ids) {
      if (!corpus.find(id)) problems.push_back(q.gold.question_id + ": unknown gold " + id);
    }
    const auto* a = corpus.find(q.matched_table);
    const auto* b = corpus.find(q.bridge_table);
    if (!a || !b) continue;
    const auto question_tokens = token_set(q.gold.question);
    for (const auto& t : token_set(serialize_object(*b))) {
      if (question_tokens.count(t)) {
        problems.push_back(q.gold.question_id + ": bridge shares token '" + t + "'");
      }
    }
    bool joined = false;
    for (std::size_t i = 0; i < a->columns.size(); ++i) {
      for (std::size_t j = 0; j < b->columns.size(); ++j) {
        if (a->columns[i] != b->columns[j]) continue;
        std::set<std::string> va, vb;
        for (const auto& row : a->rows) va.insert(row[i]);
        for (const auto& row : b->rows) vb.insert(row[j]);
        joined |= jaccard(va, vb) >= 0.8;
      }
    }
    if (!joined) problems.push_back(q.gold.question_id + ": no join column with Jaccard >= 0.8");
  }
  return problems;
}

void save_planted(const PlantedBench& bench, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_corpus(Corpus(bench.objects), dir / "corpus.jsonl");
  save_gold(bench.gold(), dir / "questions.jsonl");
}

}  // namespace arm
