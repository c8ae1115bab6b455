#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace senseknn {

/// Coarse part-of-speech tag set used for keying and reporting.
enum class Pos { Noun, Verb, Adj, Adv, Other };

std::string_view to_string(Pos pos);

/// Parses one of the canonical names NOUN, VERB, ADJ, ADV, OTHER.
std::optional<Pos> parse_pos_name(std::string_view name);

/// Maps a fine-grained tag (Penn Treebank, Universal Dependencies, WordNet
/// letters) to the coarse tag set. Unknown tags become Pos::Other.
Pos coarse_pos(std::string_view tag);

/// WordNet-style sense key such as "bank%1:17:01::".
class SenseKey {
public:
    /// Throws AnnotationError unless `raw` contains exactly one '%' and a
    /// non-empty, lowercase lemma part.
    explicit SenseKey(std::string raw);

    const std::string& str() const noexcept { return raw_; }
    std::string_view lemma_part() const;

    auto operator<=>(const SenseKey&) const = default;
    bool operator==(const SenseKey&) const = default;

private:
    std::string raw_;
};

struct Token {
    std::string surface;
    std::string lemma;
    std::optional<Pos> pos;
    /// Every annotated key in file order. The first is the training label;
    /// scoring accepts any of them.
    std::vector<SenseKey> senses;

    const SenseKey* sense() const { return senses.empty() ? nullptr : &senses.front(); }
    bool annotated() const { return !senses.empty(); }

    bool operator==(const Token&) const = default;
};

struct Sentence {
    std::string id;
    std::vector<Token> tokens;

    /// Surface forms joined by single spaces.
    std::string text() const;

    bool operator==(const Sentence&) const = default;
};

/// Ordered sentences with unique ids. Immutable once built.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::string name) : name_(std::move(name)) {}

    /// Appends a sentence. Throws AnnotationError on a duplicate id, an empty
    /// token list, or a token violating the Token invariants.
    void add(Sentence sentence);

    const std::string& name() const noexcept { return name_; }
    const std::vector<Sentence>& sentences() const noexcept { return sentences_; }
    std::size_t size() const noexcept { return sentences_.size(); }

    const Sentence* find(std::string_view id) const;

    bool operator==(const Corpus& other) const {
        return name_ == other.name_ && sentences_ == other.sentences_;
    }

private:
    std::string name_;
    std::vector<Sentence> sentences_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Reference to one token: "sentence_id#token_index".
struct InstanceKey {
    std::string sentence_id;
    std::size_t token_index = 0;

    std::string str() const;
    /// Splits at the last '#'. Throws AnnotationError on malformed input.
    static InstanceKey parse(std::string_view text);

    auto operator<=>(const InstanceKey&) const = default;
    bool operator==(const InstanceKey&) const = default;
};

enum class Keying { Lemma, LemmaPos };

std::string_view to_string(Keying keying);
/// Accepts "lemma" and "lemma+pos".
std::optional<Keying> parse_keying(std::string_view text);

/// Index key of a target word. `pos` is set iff the keying is LemmaPos.
struct WordKey {
    std::string lemma;
    std::optional<Pos> pos;

    /// "bank" or "bank.NOUN".
    std::string str() const;

    auto operator<=>(const WordKey&) const = default;
    bool operator==(const WordKey&) const = default;
};

/// Builds the word key of a token; a missing POS under LemmaPos keys as Other.
WordKey make_word_key(std::string_view lemma, std::optional<Pos> pos, Keying keying);

struct AnnotatedInstance {
    InstanceKey key;
    std::string lemma;
    std::optional<Pos> pos;
    std::vector<SenseKey> senses;

    const SenseKey& sense() const { return senses.front(); }
    WordKey word_key(Keying keying) const { return make_word_key(lemma, pos, keying); }
};

/// Every annotated token, in corpus order.
std::vector<AnnotatedInstance> annotated_instances(const Corpus& corpus);

struct CorpusStats {
    std::size_t n_sentences = 0;
    std::size_t n_instances = 0;
    std::size_t n_distinct_words = 0;
    std::size_t n_senses = 0;
    double avg_senses_per_word = 0.0;
    double avg_instances_per_word_sense = 0.0;
    double avg_k_prime = 0.0;
    /// Percentage of distinct (word, sense) pairs per POS; empty when there
    /// are no annotations.
    std::map<Pos, double> pos_distribution;

    /// Noun/Verb/Adj/Other buckets with adverbs folded into Other.
    std::map<std::string, double> reporting_buckets() const;
};

CorpusStats compute_stats(const Corpus& corpus, Keying keying);

/// UFSAC subset: <sentence> elements containing <word surface_form lemma pos wn30_key/>.
Corpus parse_ufsac_xml(std::string_view bytes, std::string name = {});

/// One {"id":..., "tokens":[{"s","l","p","k"}]} object per line.
Corpus parse_jsonl(std::string_view bytes, std::string name = {});

std::string write_jsonl(const Corpus& corpus);

enum class CorpusFormat { UfsacXml, Jsonl };

/// Chooses the format from the file extension (.xml or .jsonl).
std::optional<CorpusFormat> detect_corpus_format(std::string_view path);

Corpus load_corpus(const std::string& path, std::optional<CorpusFormat> format = std::nullopt);

}  // namespace senseknn
