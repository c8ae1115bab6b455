#include "senseknn/corpus.hpp"

#include <expat.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <memory>
#include <type_traits>

#include "senseknn/error.hpp"
#include "senseknn/io.hpp"
#include "json.hpp"

namespace senseknn {

namespace {

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string ascii_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

// Lowercases the lemma part of each key; keys are ';'-separated.
std::vector<SenseKey> parse_sense_keys(std::string_view field) {
    std::vector<SenseKey> keys;
    std::size_t start = 0;
    while (start <= field.size()) {
        std::size_t end = field.find(';', start);
        if (end == std::string_view::npos) {
            end = field.size();
        }
        std::string_view piece = field.substr(start, end - start);
        while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.front()))) {
            piece.remove_prefix(1);
        }
        while (!piece.empty() && std::isspace(static_cast<unsigned char>(piece.back()))) {
            piece.remove_suffix(1);
        }
        if (!piece.empty()) {
            std::size_t pct = piece.find('%');
            std::string raw = pct == std::string_view::npos
                                  ? std::string(piece)
                                  : ascii_lower(piece.substr(0, pct)) + std::string(piece.substr(pct));
            keys.emplace_back(std::move(raw));
        }
        start = end + 1;
    }
    return keys;
}

std::string join_sense_keys(const std::vector<SenseKey>& keys) {
    std::string out;
    for (const auto& k : keys) {
        if (!out.empty()) {
            out += ';';
        }
        out += k.str();
    }
    return out;
}

void check_token(const Token& token, const std::string& sentence_id, std::size_t index) {
    std::string where = "sentence '" + sentence_id + "' token " + std::to_string(index);
    if (token.surface.empty()) {
        throw AnnotationError(where + ": empty surface form");
    }
    if (token.lemma.empty()) {
        throw AnnotationError(where + (token.annotated() ? ": sense-annotated token has no lemma"
                                                         : ": empty lemma"));
    }
}

}  // namespace

std::string_view to_string(Pos pos) {
    switch (pos) {
        case Pos::Noun: return "NOUN";
        case Pos::Verb: return "VERB";
        case Pos::Adj: return "ADJ";
        case Pos::Adv: return "ADV";
        case Pos::Other: return "OTHER";
    }
    return "OTHER";
}

std::optional<Pos> parse_pos_name(std::string_view name) {
    for (Pos p : {Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv, Pos::Other}) {
        if (name == to_string(p)) {
            return p;
        }
    }
    return std::nullopt;
}

Pos coarse_pos(std::string_view tag) {
    const std::string t = ascii_upper(tag);
    if (t == "NOUN" || t == "PROPN" || t == "N" || starts_with(t, "NN")) {
        return Pos::Noun;
    }
    if (t == "VERB" || t == "AUX" || t == "V" || starts_with(t, "VB")) {
        return Pos::Verb;
    }
    if (t == "ADJ" || t == "A" || t == "S" || t == "J" || starts_with(t, "JJ")) {
        return Pos::Adj;
    }
    if (t == "ADV" || t == "R" || t == "WRB" || starts_with(t, "RB")) {
        return Pos::Adv;
    }
    return Pos::Other;
}

SenseKey::SenseKey(std::string raw) : raw_(std::move(raw)) {
    std::size_t pct = raw_.find('%');
    if (pct == std::string::npos || raw_.find('%', pct + 1) != std::string::npos) {
        throw AnnotationError("sense key '" + raw_ + "' must contain exactly one '%'");
    }
    if (pct == 0) {
        throw AnnotationError("sense key '" + raw_ + "' has an empty lemma part");
    }
    std::string_view lemma = lemma_part();
    if (ascii_lower(lemma) != lemma) {
        throw AnnotationError("sense key '" + raw_ + "' has an uppercase lemma part");
    }
}

std::string_view SenseKey::lemma_part() const {
    return std::string_view(raw_).substr(0, raw_.find('%'));
}

std::string Sentence::text() const {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) {
            out += ' ';
        }
        out += t.surface;
    }
    return out;
}

void Corpus::add(Sentence sentence) {
    if (sentence.tokens.empty()) {
        throw AnnotationError("sentence '" + sentence.id + "' has no tokens");
    }
    if (by_id_.count(sentence.id) != 0) {
        throw AnnotationError("duplicate sentence id '" + sentence.id + "'");
    }
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
        check_token(sentence.tokens[i], sentence.id, i);
    }
    by_id_.emplace(sentence.id, sentences_.size());
    sentences_.push_back(std::move(sentence));
}

const Sentence* Corpus::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &sentences_[it->second];
}

std::string InstanceKey::str() const {
    return sentence_id + "#" + std::to_string(token_index);
}

InstanceKey InstanceKey::parse(std::string_view text) {
    std::size_t hash = text.rfind('#');
    if (hash == std::string_view::npos || hash == 0 || hash + 1 == text.size()) {
        throw AnnotationError("malformed instance key '" + std::string(text) + "'");
    }
    std::string_view digits = text.substr(hash + 1);
    std::size_t index = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
        throw AnnotationError("malformed instance key '" + std::string(text) + "'");
    }
    return InstanceKey{std::string(text.substr(0, hash)), index};
}

std::string_view to_string(Keying keying) {
    return keying == Keying::Lemma ? "lemma" : "lemma+pos";
}

std::optional<Keying> parse_keying(std::string_view text) {
    if (text == "lemma") {
        return Keying::Lemma;
    }
    if (text == "lemma+pos") {
        return Keying::LemmaPos;
    }
    return std::nullopt;
}

std::string WordKey::str() const {
    return pos ? lemma + "." + std::string(to_string(*pos)) : lemma;
}

WordKey make_word_key(std::string_view lemma, std::optional<Pos> pos, Keying keying) {
    WordKey key{std::string(lemma), std::nullopt};
    if (keying == Keying::LemmaPos) {
        key.pos = pos.value_or(Pos::Other);
    }
    return key;
}

std::vector<AnnotatedInstance> annotated_instances(const Corpus& corpus) {
    std::vector<AnnotatedInstance> out;
    for (const auto& sentence : corpus.sentences()) {
        for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
            const Token& t = sentence.tokens[i];
            if (t.annotated()) {
                out.push_back({InstanceKey{sentence.id, i}, t.lemma, t.pos, t.senses});
            }
        }
    }
    return out;
}

std::map<std::string, double> CorpusStats::reporting_buckets() const {
    std::map<std::string, double> out;
    if (pos_distribution.empty()) {
        return out;
    }
    out = {{"Noun", 0.0}, {"Verb", 0.0}, {"Adj", 0.0}, {"Other", 0.0}};
    for (const auto& [pos, pct] : pos_distribution) {
        switch (pos) {
            case Pos::Noun: out["Noun"] += pct; break;
            case Pos::Verb: out["Verb"] += pct; break;
            case Pos::Adj: out["Adj"] += pct; break;
            default: out["Other"] += pct; break;
        }
    }
    return out;
}

CorpusStats compute_stats(const Corpus& corpus, Keying keying) {
    CorpusStats stats;
    stats.n_sentences = corpus.size();

    // word -> sense -> (count, pos of first occurrence)
    std::map<WordKey, std::map<SenseKey, std::pair<std::size_t, Pos>>> counts;
    for (const auto& inst : annotated_instances(corpus)) {
        ++stats.n_instances;
        auto& slot = counts[inst.word_key(keying)];
        auto [it, inserted] = slot.try_emplace(inst.sense(), 0, inst.pos.value_or(Pos::Other));
        ++it->second.first;
    }
    if (stats.n_instances == 0) {
        return stats;
    }

    stats.n_distinct_words = counts.size();
    std::map<Pos, std::size_t> pos_senses;
    double k_prime_sum = 0.0;
    for (const auto& [word, senses] : counts) {
        stats.n_senses += senses.size();
        std::size_t c_min = senses.begin()->second.first;
        for (const auto& [sense, entry] : senses) {
            c_min = std::min(c_min, entry.first);
            ++pos_senses[entry.second];
        }
        k_prime_sum += static_cast<double>(c_min);
    }
    stats.avg_senses_per_word =
        static_cast<double>(stats.n_senses) / static_cast<double>(stats.n_distinct_words);
    stats.avg_instances_per_word_sense =
        static_cast<double>(stats.n_instances) / static_cast<double>(stats.n_senses);
    stats.avg_k_prime = k_prime_sum / static_cast<double>(stats.n_distinct_words);
    for (const auto& [pos, n] : pos_senses) {
        stats.pos_distribution[pos] =
            100.0 * static_cast<double>(n) / static_cast<double>(stats.n_senses);
    }
    return stats;
}

// ---------------------------------------------------------------------------
// UFSAC XML

namespace {

struct UfsacState {
    XML_Parser parser = nullptr;
    Corpus* corpus = nullptr;
    std::optional<Sentence> current;
    std::size_t sentence_ordinal = 0;
    std::optional<std::string> error;
    bool annotation_error = false;

    void fail(std::string message, bool annotation) {
        if (!error) {
            error = std::move(message);
            annotation_error = annotation;
        }
        XML_StopParser(parser, XML_FALSE);
    }
};

const char* find_attr(const XML_Char** attrs, std::string_view name) {
    for (std::size_t i = 0; attrs[i] != nullptr; i += 2) {
        if (name == attrs[i]) {
            return attrs[i + 1];
        }
    }
    return nullptr;
}

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
    auto& st = *static_cast<UfsacState*>(data);
    std::string_view element(name);
    if (element == "sentence") {
        if (st.current) {
            st.fail("nested <sentence> element", false);
            return;
        }
        const char* id = find_attr(attrs, "id");
        st.current = Sentence{id != nullptr ? std::string(id) : "s" + std::to_string(st.sentence_ordinal), {}};
        ++st.sentence_ordinal;
        return;
    }
    if (element != "word" || !st.current) {
        return;
    }
    const char* surface = find_attr(attrs, "surface_form");
    const char* lemma = find_attr(attrs, "lemma");
    const char* pos = find_attr(attrs, "pos");
    const char* keys = find_attr(attrs, "wn30_key");
    const std::size_t index = st.current->tokens.size();
    Token token;
    token.surface = surface != nullptr ? surface : "";
    if (token.surface.empty()) {
        st.fail("sentence '" + st.current->id + "' word " + std::to_string(index) +
                    " has no surface_form",
                true);
        return;
    }
    try {
        if (keys != nullptr) {
            token.senses = parse_sense_keys(keys);
        }
    } catch (const AnnotationError& e) {
        st.fail("sentence '" + st.current->id + "': " + e.what(), true);
        return;
    }
    if (lemma != nullptr && *lemma != '\0') {
        token.lemma = ascii_lower(lemma);
    } else if (token.annotated()) {
        st.fail("sentence '" + st.current->id + "' word " + std::to_string(index) +
                    " carries wn30_key but no lemma",
                true);
        return;
    } else {
        token.lemma = ascii_lower(token.surface);
    }
    if (pos != nullptr && *pos != '\0') {
        token.pos = coarse_pos(pos);
    }
    st.current->tokens.push_back(std::move(token));
}

void XMLCALL on_end(void* data, const XML_Char* name) {
    auto& st = *static_cast<UfsacState*>(data);
    if (std::string_view(name) != "sentence" || !st.current) {
        return;
    }
    Sentence sentence = std::move(*st.current);
    st.current.reset();
    if (sentence.tokens.empty()) {
        return;
    }
    try {
        st.corpus->add(std::move(sentence));
    } catch (const AnnotationError& e) {
        st.fail(e.what(), true);
    }
}

}  // namespace

Corpus parse_ufsac_xml(std::string_view bytes, std::string name) {
    Corpus corpus(std::move(name));
    std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
        XML_ParserCreate("UTF-8"), &XML_ParserFree);
    if (!parser) {
        throw Error("cannot allocate XML parser");
    }
    UfsacState state;
    state.parser = parser.get();
    state.corpus = &corpus;
    XML_SetUserData(parser.get(), &state);
    XML_SetElementHandler(parser.get(), on_start, on_end);

    const XML_Status status =
        XML_Parse(parser.get(), bytes.data(), static_cast<int>(bytes.size()), XML_TRUE);
    const auto offset = static_cast<std::size_t>(std::max<XML_Index>(0, XML_GetCurrentByteIndex(parser.get())));
    if (state.error) {
        if (state.annotation_error) {
            throw AnnotationError(*state.error);
        }
        throw ParseError(*state.error, offset);
    }
    if (status != XML_STATUS_OK) {
        throw ParseError(std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser.get())),
                         offset);
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// JSONL

Corpus parse_jsonl(std::string_view bytes, std::string name) {
    using nlohmann::json;
    Corpus corpus(std::move(name));
    std::size_t line_start = 0;
    std::size_t line_no = 0;
    while (line_start < bytes.size()) {
        std::size_t line_end = bytes.find('\n', line_start);
        if (line_end == std::string_view::npos) {
            line_end = bytes.size();
        }
        std::string_view line = bytes.substr(line_start, line_end - line_start);
        ++line_no;
        const std::size_t offset = line_start;
        line_start = line_end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what(), offset + e.byte - 1);
        }
        auto bad = [&](const std::string& what) {
            return ParseError("line " + std::to_string(line_no) + ": " + what, offset);
        };
        if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string()) {
            throw bad("expected an object with a string \"id\"");
        }
        if (!obj.contains("tokens") || !obj["tokens"].is_array()) {
            throw bad("expected a \"tokens\" array");
        }
        Sentence sentence{obj["id"].get<std::string>(), {}};
        for (const auto& t : obj["tokens"]) {
            if (!t.is_object()) {
                throw bad("token is not an object");
            }
            auto str_field = [&](const char* key) -> std::optional<std::string> {
                auto it = t.find(key);
                if (it == t.end() || it->is_null()) {
                    return std::nullopt;
                }
                if (!it->is_string()) {
                    throw bad(std::string("token field \"") + key + "\" must be a string");
                }
                return it->get<std::string>();
            };
            Token token;
            token.surface = str_field("s").value_or("");
            auto lemma = str_field("l");
            auto pos = str_field("p");
            auto keys = str_field("k");
            if (keys) {
                token.senses = parse_sense_keys(*keys);
                if (token.annotated() && !lemma) {
                    throw AnnotationError("sentence '" + sentence.id + "' token " +
                                          std::to_string(sentence.tokens.size()) +
                                          " has \"k\" but no \"l\"");
                }
            }
            token.lemma = lemma ? ascii_lower(*lemma) : ascii_lower(token.surface);
            if (pos) {
                token.pos = coarse_pos(*pos);
            }
            sentence.tokens.push_back(std::move(token));
        }
        corpus.add(std::move(sentence));
    }
    return corpus;
}

std::string write_jsonl(const Corpus& corpus) {
    using nlohmann::ordered_json;
    std::string out;
    for (const auto& sentence : corpus.sentences()) {
        ordered_json obj;
        obj["id"] = sentence.id;
        ordered_json tokens = ordered_json::array();
        for (const auto& t : sentence.tokens) {
            ordered_json tok;
            tok["s"] = t.surface;
            tok["l"] = t.lemma;
            if (t.pos) {
                tok["p"] = std::string(to_string(*t.pos));
            }
            if (t.annotated()) {
                tok["k"] = join_sense_keys(t.senses);
            }
            tokens.push_back(std::move(tok));
        }
        obj["tokens"] = std::move(tokens);
        out += obj.dump();
        out += '\n';
    }
    return out;
}

std::optional<CorpusFormat> detect_corpus_format(std::string_view path) {
    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() &&
               ascii_lower(path.substr(path.size() - suffix.size())) == suffix;
    };
    if (ends_with(".xml")) {
        return CorpusFormat::UfsacXml;
    }
    if (ends_with(".jsonl")) {
        return CorpusFormat::Jsonl;
    }
    return std::nullopt;
}

Corpus load_corpus(const std::string& path, std::optional<CorpusFormat> format) {
    if (!format) {
        format = detect_corpus_format(path);
    }
    if (!format) {
        throw Error("cannot infer corpus format of '" + path + "' (expected .xml or .jsonl)");
    }
    const std::string bytes = read_file(path);
    std::string name = path.substr(path.find_last_of('/') == std::string::npos ? 0 : path.find_last_of('/') + 1);
    return *format == CorpusFormat::UfsacXml ? parse_ufsac_xml(bytes, std::move(name))
                                             : parse_jsonl(bytes, std::move(name));
}

}  // namespace senseknn
