// senseknn: localized nearest-neighbor word sense disambiguation over
// precomputed contextualized embeddings.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "senseknn/corpus.hpp"
#include "senseknn/error.hpp"
#include "senseknn/evaluation.hpp"
#include "senseknn/io.hpp"
#include "senseknn/projection.hpp"
#include "senseknn/sense_index.hpp"
#include "senseknn/vectors.hpp"

namespace {

using namespace senseknn;

const std::map<std::string, Keying> kKeyings{{"lemma", Keying::Lemma}, {"lemma+pos", Keying::LemmaPos}};
const std::map<std::string, Backoff> kBackoffs{{"none", Backoff::None}, {"mfs", Backoff::GlobalMfs}};
const std::map<std::string, TableFormat> kFormats{{"tsv", TableFormat::Tsv}, {"md", TableFormat::Markdown}};
const std::map<std::string, CorpusFormat> kCorpusFormats{{"xml", CorpusFormat::UfsacXml},
                                                         {"jsonl", CorpusFormat::Jsonl}};

// Enum options go through a string so CLI11 never has to print the enum.
template <class E>
CLI::Option* add_choice(CLI::App* cmd, const std::string& name, E& target, const std::map<std::string, E>& choices,
                        const std::string& description = "") {
    return cmd->add_option_function<std::string>(
                  name, [&target, &choices](const std::string& v) { target = choices.at(v); }, description)
        ->check(CLI::IsMember(choices));
}

struct CorpusArg {
    std::string path;
    std::optional<CorpusFormat> format;

    Corpus load() const { return load_corpus(path, format); }
};

void emit(const std::string& out_path, const std::string& bytes) {
    if (out_path.empty()) {
        std::cout << bytes;
        std::cout.flush();
    } else {
        write_file(out_path, bytes);
    }
}

std::string fixed2(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

void add_corpus_format(CLI::App* cmd, CorpusArg& arg) {
    cmd->add_option("--corpus-format", arg.format, "Corpus format (default: by extension)")
        ->transform(CLI::CheckedTransformer(kCorpusFormats, CLI::ignore_case));
}

std::optional<Pos> parse_pos_flag(const std::string& text) {
    if (text.empty()) {
        return std::nullopt;
    }
    auto pos = parse_pos_name(text);
    if (!pos) {
        throw Error("unknown POS '" + text + "' (expected NOUN, VERB, ADJ, ADV or OTHER)");
    }
    return pos;
}

// ---------------------------------------------------------------------------

struct StatsArgs {
    CorpusArg corpus;
    Keying keying = Keying::Lemma;
    TableFormat format = TableFormat::Tsv;
    std::string out;
};

void run_stats(const StatsArgs& a) {
    const Corpus corpus = a.corpus.load();
    const CorpusStats s = compute_stats(corpus, a.keying);
    std::vector<std::pair<std::string, std::string>> rows{
        {"#sentences", std::to_string(s.n_sentences)},
        {"#CWEs", std::to_string(s.n_instances)},
        {"#distinct words", std::to_string(s.n_distinct_words)},
        {"#senses", std::to_string(s.n_senses)},
        {"avg #senses p. word", fixed2(s.avg_senses_per_word)},
        {"avg #CWEs p. word & sense", fixed2(s.avg_instances_per_word_sense)},
        {"avg k'", fixed2(s.avg_k_prime)},
    };
    for (const auto& [bucket, pct] : s.reporting_buckets()) {
        rows.emplace_back("% senses " + bucket, fixed2(pct));
    }
    const std::string title = corpus.name() + " (" + std::string(to_string(a.keying)) + ")";
    std::string out;
    if (a.format == TableFormat::Tsv) {
        out = "property\t" + title + "\n";
        for (const auto& [k, v] : rows) {
            out += k + "\t" + v + "\n";
        }
    } else {
        out = "| property | " + title + " |\n| --- | ---: |\n";
        for (const auto& [k, v] : rows) {
            out += "| " + k + " | " + v + " |\n";
        }
    }
    emit(a.out, out);
}

// ---------------------------------------------------------------------------

struct BuildArgs {
    CorpusArg corpus;
    std::string vectors;
    Keying keying = Keying::Lemma;
    std::string out;
};

void run_build(const BuildArgs& a) {
    const Corpus corpus = a.corpus.load();
    const VectorStore store = load_store(a.vectors);
    BuildReport report;
    const SenseIndex index = build_index(corpus, store, a.keying, &report);
    write_file(a.out, save_index(index));
    std::cerr << "indexed " << report.indexed << " instances in " << index.buckets().size() << " buckets; "
              << report.missing_vectors.size() << " annotated instances lack vectors\n";
    for (const auto& key : report.missing_vectors) {
        std::cerr << "  missing vector: " << key.str() << "\n";
    }
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string index;
    CorpusArg corpus;
    std::string vectors;
    std::size_t k = 1;
    std::vector<std::size_t> ks;
    Backoff backoff = Backoff::None;
    TableFormat format = TableFormat::Tsv;
    bool with_mfs = false;
    std::string out;
};

void run_eval(const EvalArgs& a) {
    const SenseIndex index = load_index(read_file(a.index));
    const Corpus test = a.corpus.load();
    const VectorStore store = load_store(a.vectors);
    const EvalResult r = evaluate(index, test, store, a.k, a.backoff, index.keying());
    emit(a.out, render_table(r, a.format));
}

void run_sweep(const EvalArgs& a) {
    const SenseIndex index = load_index(read_file(a.index));
    const Corpus test = a.corpus.load();
    const VectorStore store = load_store(a.vectors);
    const auto ks = a.ks.empty() ? default_k_grid() : a.ks;
    const SweepResult sweep = sweep_k(index, test, store, ks, a.backoff, index.keying());
    std::optional<EvalResult> mfs;
    if (a.with_mfs) {
        mfs = evaluate_mfs(index, test, index.keying());
    }
    emit(a.out, render_table(sweep, a.format, mfs ? &*mfs : nullptr));
}

void run_mfs(const EvalArgs& a) {
    const SenseIndex index = load_index(read_file(a.index));
    const Corpus test = a.corpus.load();
    emit(a.out, render_table(evaluate_mfs(index, test, index.keying()), a.format));
}

// ---------------------------------------------------------------------------

struct NeighborsArgs {
    std::string index;
    std::string vectors;
    std::string instance;
    std::size_t n = 5;
    std::size_t k = 1;
    CorpusArg test_corpus;
    CorpusArg train_corpus;
    std::string lemma;
    std::string pos;
    std::string out;
};

std::string marked_text(const Sentence& s, std::size_t target) {
    std::string out;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        if (i > 0) {
            out += ' ';
        }
        out += i == target ? "[" + s.tokens[i].surface + "]" : s.tokens[i].surface;
    }
    return out;
}

void run_neighbors(const NeighborsArgs& a) {
    const SenseIndex index = load_index(read_file(a.index));
    const VectorStore store = load_store(a.vectors);
    const InstanceKey key = InstanceKey::parse(a.instance);
    auto query = store.lookup(key.str());
    if (!query) {
        throw LookupError("instance '" + key.str() + "' has no vector in '" + a.vectors + "'");
    }

    std::optional<Corpus> test;
    std::optional<WordKey> word;
    std::string query_text;
    if (!a.test_corpus.path.empty()) {
        test = a.test_corpus.load();
        const Sentence* s = test->find(key.sentence_id);
        if (s == nullptr || key.token_index >= s->tokens.size()) {
            throw LookupError("instance '" + key.str() + "' is not in '" + a.test_corpus.path + "'");
        }
        const Token& t = s->tokens[key.token_index];
        word = make_word_key(t.lemma, t.pos, index.keying());
        query_text = marked_text(*s, key.token_index);
    }
    if (!a.lemma.empty()) {
        word = make_word_key(a.lemma, parse_pos_flag(a.pos), index.keying());
    }
    if (!word) {
        throw Error("the target word is unknown: pass --test-corpus or --lemma");
    }
    if (!index.contains(*word)) {
        throw LookupError("word '" + word->str() + "' is not in the index");
    }
    std::optional<Corpus> train;
    if (!a.train_corpus.path.empty()) {
        train = a.train_corpus.load();
    }

    const Prediction p = index.classify(*word, *query, a.k);
    std::string out = "# query\t" + key.str() + "\tword\t" + word->str();
    if (!query_text.empty()) {
        out += "\t" + query_text;
    }
    out += "\n# prediction\t" + p.sense.value_or("-") + "\tk\t" + std::to_string(a.k) + "\tk'\t" +
           std::to_string(p.k_used) + "\n";
    out += "rank\tdistance\tsense\tprovenance";
    out += train ? "\tsentence\n" : "\n";
    const auto nearest = index.neighbors(*word, *query, a.n);
    for (std::size_t i = 0; i < nearest.size(); ++i) {
        const Neighbor& nb = nearest[i];
        char dist[32];
        std::snprintf(dist, sizeof dist, "%.6f", nb.distance);
        out += std::to_string(i + 1) + "\t" + dist + "\t" + nb.sense + "\t" + nb.provenance.str();
        if (train) {
            const Sentence* s = train->find(nb.provenance.sentence_id);
            out += "\t" + (s != nullptr ? marked_text(*s, nb.provenance.token_index) : std::string("?"));
        }
        out += "\n";
    }
    emit(a.out, out);
}

// ---------------------------------------------------------------------------

struct ProjectArgs {
    std::string vectors;
    CorpusArg corpus;
    std::string lemma;
    std::string pos;
    ProjectionConfig config;
    std::size_t min_label_frequency = 2;
    std::string trace;
    std::string out;
};

void run_project(const ProjectArgs& a) {
    const Corpus corpus = a.corpus.load();
    const VectorStore store = load_store(a.vectors);
    const std::optional<Pos> pos = parse_pos_flag(a.pos);
    const std::string lemma = make_word_key(a.lemma, std::nullopt, Keying::Lemma).lemma;

    std::vector<std::vector<double>> points;
    std::vector<std::string> labels;
    std::vector<std::string> provenance;
    std::size_t missing = 0;
    for (const auto& inst : annotated_instances(corpus)) {
        if (inst.lemma != lemma || (pos && inst.pos.value_or(Pos::Other) != *pos)) {
            continue;
        }
        auto v = store.lookup(inst.key.str());
        if (!v) {
            ++missing;
            continue;
        }
        points.emplace_back(v->begin(), v->end());
        labels.push_back(inst.sense().str());
        provenance.push_back(inst.key.str());
    }
    if (missing > 0) {
        std::cerr << "warning: " << missing << " instances of '" << lemma << "' lack vectors\n";
    }
    const ProjectionResult r = tsne(points, labels, provenance, a.config);
    if (r.unconverged_rows > 0) {
        std::cerr << "warning: bandwidth search did not converge for " << r.unconverged_rows << " points\n";
    }
    char header[160];
    std::snprintf(header, sizeof header, "# lemma=%s seed=%llu perplexity=%.4g iterations=%d kl=%.6g\n",
                  lemma.c_str(), static_cast<unsigned long long>(a.config.seed), r.perplexity_used,
                  a.config.iterations, r.trace.back().kl);
    emit(a.out, header + export_plot_data(r.coords, a.min_label_frequency));
    if (!a.trace.empty()) {
        write_file(a.trace, export_trace(r.trace));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localized kNN word sense disambiguation over contextualized embeddings"};
    app.require_subcommand(1);

    StatsArgs stats;
    auto* cmd_stats = app.add_subcommand("stats", "Dataset statistics of a sense-annotated corpus");
    cmd_stats->add_option("corpus", stats.corpus.path, "Corpus file (.xml or .jsonl)")->required();
    add_corpus_format(cmd_stats, stats.corpus);
    add_choice(cmd_stats, "--keying", stats.keying, kKeyings);
    cmd_stats->add_option("--format", stats.format)->transform(CLI::CheckedTransformer(kFormats));
    cmd_stats->add_option("--out", stats.out, "Output file (default: stdout)");

    BuildArgs build;
    auto* cmd_build = app.add_subcommand("build", "Build a sense index from training data");
    cmd_build->add_option("--corpus", build.corpus.path, "Training corpus")->required();
    add_corpus_format(cmd_build, build.corpus);
    cmd_build->add_option("--vectors", build.vectors, "CWE1 vector store of the training corpus")->required();
    add_choice(cmd_build, "--keying", build.keying, kKeyings);
    cmd_build->add_option("--out", build.out, "Index file to write")->required();

    EvalArgs eval;
    auto add_eval_options = [&](CLI::App* cmd, bool needs_vectors) {
        cmd->add_option("--index", eval.index, "Sense index file")->required();
        cmd->add_option("--corpus", eval.corpus.path, "Test corpus")->required();
        add_corpus_format(cmd, eval.corpus);
        if (needs_vectors) {
            cmd->add_option("--vectors", eval.vectors, "CWE1 vector store of the test corpus")->required();
            add_choice(cmd, "--backoff", eval.backoff, kBackoffs, "Unseen-word handling");
        }
        cmd->add_option("--format", eval.format)->transform(CLI::CheckedTransformer(kFormats));
        cmd->add_option("--out", eval.out, "Output file (default: stdout)");
    };
    auto* cmd_eval = app.add_subcommand("eval", "Score kNN predictions on a test corpus");
    add_eval_options(cmd_eval, true);
    cmd_eval->add_option("-k", eval.k, "Neighborhood size")->check(CLI::PositiveNumber);

    auto* cmd_sweep = app.add_subcommand("sweep", "Score several values of k");
    add_eval_options(cmd_sweep, true);
    cmd_sweep->add_option("--ks", eval.ks, "Comma-separated ascending k values (default 1..10,50,100,500,1000)")
        ->delimiter(',')
        ->check(CLI::PositiveNumber);
    cmd_sweep->add_flag("--with-mfs", eval.with_mfs, "Append a most-frequent-sense row");

    auto* cmd_mfs = app.add_subcommand("mfs", "Score the most-frequent-sense baseline");
    add_eval_options(cmd_mfs, false);

    NeighborsArgs nb;
    auto* cmd_nb = app.add_subcommand("neighbors", "Nearest training instances of one test instance");
    cmd_nb->add_option("--index", nb.index, "Sense index file")->required();
    cmd_nb->add_option("--vectors", nb.vectors, "CWE1 store holding the query instance")->required();
    cmd_nb->add_option("--instance", nb.instance, "Query instance key, sentence_id#token_index")->required();
    cmd_nb->add_option("-n", nb.n, "Number of neighbors")->check(CLI::PositiveNumber);
    cmd_nb->add_option("-k", nb.k, "k used for the reported prediction")->check(CLI::PositiveNumber);
    cmd_nb->add_option("--test-corpus", nb.test_corpus.path, "Corpus holding the query sentence");
    cmd_nb->add_option("--train-corpus", nb.train_corpus.path, "Training corpus, to print neighbor sentences");
    cmd_nb->add_option("--lemma", nb.lemma, "Target lemma (overrides the test corpus)");
    cmd_nb->add_option("--pos", nb.pos, "Target POS for lemma+pos indexes");
    cmd_nb->add_option("--out", nb.out, "Output file (default: stdout)");

    ProjectArgs proj;
    auto* cmd_proj = app.add_subcommand("project", "t-SNE projection of one word's vectors");
    cmd_proj->add_option("--vectors", proj.vectors, "CWE1 vector store")->required();
    cmd_proj->add_option("--corpus", proj.corpus.path, "Corpus with the sense labels")->required();
    add_corpus_format(cmd_proj, proj.corpus);
    cmd_proj->add_option("--lemma", proj.lemma, "Word to project")->required();
    cmd_proj->add_option("--pos", proj.pos, "Restrict to one POS");
    cmd_proj->add_option("--perplexity", proj.config.perplexity);
    cmd_proj->add_option("--iterations", proj.config.iterations);
    cmd_proj->add_option("--learning-rate", proj.config.learning_rate);
    cmd_proj->add_option("--momentum", proj.config.momentum);
    cmd_proj->add_option("--final-momentum", proj.config.final_momentum);
    cmd_proj->add_option("--exaggeration", proj.config.early_exaggeration_factor);
    cmd_proj->add_option("--exaggeration-iters", proj.config.early_exaggeration_iters);
    cmd_proj->add_option("--seed", proj.config.seed);
    cmd_proj->add_flag("--normalize", proj.config.normalize, "Length-normalize vectors first");
    cmd_proj->add_option("--min-label-frequency", proj.min_label_frequency, "Drop senses rarer than this");
    cmd_proj->add_option("--trace", proj.trace, "Write the KL trace CSV here");
    cmd_proj->add_option("--out", proj.out, "Output CSV (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_stats->parsed()) {
            run_stats(stats);
        } else if (cmd_build->parsed()) {
            run_build(build);
        } else if (cmd_eval->parsed()) {
            run_eval(eval);
        } else if (cmd_sweep->parsed()) {
            run_sweep(eval);
        } else if (cmd_mfs->parsed()) {
            run_mfs(eval);
        } else if (cmd_nb->parsed()) {
            run_neighbors(nb);
        } else if (cmd_proj->parsed()) {
            run_project(proj);
        }
    } catch (const std::exception& e) {
        std::cerr << "senseknn: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
