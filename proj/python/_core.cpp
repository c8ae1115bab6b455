#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "senseknn/corpus.hpp"
#include "senseknn/error.hpp"
#include "senseknn/evaluation.hpp"
#include "senseknn/projection.hpp"
#include "senseknn/sense_index.hpp"
#include "senseknn/vectors.hpp"

namespace py = pybind11;
using namespace senseknn;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Vector to_vector(const FloatArray& a) {
    if (a.ndim() != 1) {
        throw py::value_error("expected a 1-D array");
    }
    return Vector(a.data(), a.data() + a.size());
}

FloatArray to_array(VectorView v) {
    FloatArray out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::vector<std::vector<double>> to_rows(const DoubleArray& a) {
    if (a.ndim() != 2) {
        throw py::value_error("expected a 2-D array of shape (n, dim)");
    }
    const auto n = static_cast<std::size_t>(a.shape(0));
    const auto d = static_cast<std::size_t>(a.shape(1));
    std::vector<std::vector<double>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows[i].assign(a.data() + i * d, a.data() + (i + 1) * d);
    }
    return rows;
}

std::optional<Pos> pos_arg(const std::optional<std::string>& name) {
    if (!name) {
        return std::nullopt;
    }
    auto p = parse_pos_name(*name);
    if (!p) {
        throw py::value_error("unknown POS '" + *name + "'");
    }
    return p;
}

std::optional<std::string> pos_name(const std::optional<Pos>& p) {
    if (!p) {
        return std::nullopt;
    }
    return std::string(to_string(*p));
}

py::list neighbor_list(const std::vector<Neighbor>& ns) {
    py::list out;
    for (const auto& n : ns) {
        out.append(py::make_tuple(n.provenance.str(), n.sense, n.distance));
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Localized nearest-neighbor word sense disambiguation over contextualized embeddings.";

    auto base = py::register_exception<Error>(m, "SenseKnnError");
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<AnnotationError>(m, "AnnotationError", base.ptr());
    py::register_exception<FormatError>(m, "FormatError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<LookupError>(m, "LookupError", base.ptr());

    py::enum_<Keying>(m, "Keying").value("LEMMA", Keying::Lemma).value("LEMMA_POS", Keying::LemmaPos);
    py::enum_<Backoff>(m, "Backoff").value("NONE", Backoff::None).value("GLOBAL_MFS", Backoff::GlobalMfs);
    py::enum_<TableFormat>(m, "TableFormat").value("TSV", TableFormat::Tsv).value("MARKDOWN", TableFormat::Markdown);

    // Corpus ---------------------------------------------------------------
    py::class_<Token>(m, "Token")
        .def_readonly("surface", &Token::surface)
        .def_readonly("lemma", &Token::lemma)
        .def_property_readonly("pos", [](const Token& t) { return pos_name(t.pos); })
        .def_property_readonly("senses", [](const Token& t) {
            std::vector<std::string> out;
            for (const auto& s : t.senses) {
                out.push_back(s.str());
            }
            return out;
        });

    py::class_<Sentence>(m, "Sentence")
        .def_readonly("id", &Sentence::id)
        .def_readonly("tokens", &Sentence::tokens)
        .def("text", &Sentence::text);

    py::class_<Corpus>(m, "Corpus")
        .def_property_readonly("name", &Corpus::name)
        .def_property_readonly("sentences", &Corpus::sentences)
        .def("__len__", &Corpus::size)
        .def("__eq__", [](const Corpus& a, const Corpus& b) { return a == b; });

    m.def("parse_jsonl", [](const py::bytes& b, std::string name) { return parse_jsonl(std::string(b), std::move(name)); },
          py::arg("data"), py::arg("name") = "");
    m.def("parse_ufsac_xml",
          [](const py::bytes& b, std::string name) { return parse_ufsac_xml(std::string(b), std::move(name)); },
          py::arg("data"), py::arg("name") = "");
    m.def("write_jsonl", [](const Corpus& c) { return py::bytes(write_jsonl(c)); });
    m.def("load_corpus", [](const std::string& path) { return load_corpus(path); }, py::arg("path"));
    m.def("annotated_instances", [](const Corpus& c) {
        py::list out;
        for (const auto& inst : annotated_instances(c)) {
            out.append(py::make_tuple(inst.key.str(), inst.lemma, pos_name(inst.pos), inst.sense().str()));
        }
        return out;
    });

    py::class_<CorpusStats>(m, "CorpusStats")
        .def_readonly("n_sentences", &CorpusStats::n_sentences)
        .def_readonly("n_instances", &CorpusStats::n_instances)
        .def_readonly("n_distinct_words", &CorpusStats::n_distinct_words)
        .def_readonly("n_senses", &CorpusStats::n_senses)
        .def_readonly("avg_senses_per_word", &CorpusStats::avg_senses_per_word)
        .def_readonly("avg_instances_per_word_sense", &CorpusStats::avg_instances_per_word_sense)
        .def_readonly("avg_k_prime", &CorpusStats::avg_k_prime)
        .def_property_readonly("pos_distribution", [](const CorpusStats& s) {
            std::map<std::string, double> out;
            for (const auto& [p, pct] : s.pos_distribution) {
                out[std::string(to_string(p))] = pct;
            }
            return out;
        });
    m.def("compute_stats", &compute_stats, py::arg("corpus"), py::arg("keying") = Keying::Lemma);

    // Vectors --------------------------------------------------------------
    py::class_<VectorStore>(m, "VectorStore")
        .def(py::init<std::size_t>(), py::arg("dim"))
        .def_property_readonly("dim", &VectorStore::dim)
        .def("__len__", &VectorStore::size)
        .def("__contains__", [](const VectorStore& s, const std::string& k) { return s.contains(k); })
        .def("keys", &VectorStore::keys)
        .def("insert", [](VectorStore& s, std::string key, const FloatArray& v) { s.insert(std::move(key), to_vector(v)); })
        .def("lookup", [](const VectorStore& s, const std::string& key) -> std::optional<FloatArray> {
            auto v = s.lookup(key);
            if (!v) {
                return std::nullopt;
            }
            return to_array(*v);
        })
        .def("__eq__", [](const VectorStore& a, const VectorStore& b) { return a == b; });
    m.def("read_store", [](const py::bytes& b) { return read_store(std::string(b)); });
    m.def("write_store", [](const VectorStore& s) { return py::bytes(write_store(s)); });
    m.def("load_store", &load_store);
    m.def("save_store", &save_store);
    m.def("cosine_distance", [](const FloatArray& u, const FloatArray& v) {
        return cosine_distance(to_vector(u), to_vector(v));
    });

    // Sense index ----------------------------------------------------------
    py::class_<Prediction>(m, "Prediction")
        .def_readonly("sense", &Prediction::sense)
        .def_readonly("k_used", &Prediction::k_used)
        .def_property_readonly("method", [](const Prediction& p) { return std::string(to_string(p.method)); })
        .def_property_readonly("neighbors", [](const Prediction& p) { return neighbor_list(p.neighbors); });

    py::class_<SenseIndex>(m, "SenseIndex")
        .def_property_readonly("dim", &SenseIndex::dim)
        .def_property_readonly("keying", &SenseIndex::keying)
        .def("__len__", &SenseIndex::entry_count)
        .def("words", [](const SenseIndex& idx) {
            std::vector<std::string> out;
            for (const auto& [k, b] : idx.buckets()) {
                out.push_back(k.str());
            }
            return out;
        })
        .def("sense_counts", [](const SenseIndex& idx, const std::string& lemma, std::optional<std::string> pos) {
            const Bucket* b = idx.find(WordKey{lemma, pos_arg(pos)});
            if (b == nullptr) {
                throw LookupError("word '" + lemma + "' is not in the index");
            }
            return b->sense_counts;
        }, py::arg("lemma"), py::arg("pos") = py::none())
        .def("effective_k", [](const SenseIndex& idx, const std::string& lemma, std::size_t k, std::optional<std::string> pos) {
            return idx.effective_k(WordKey{lemma, pos_arg(pos)}, k);
        }, py::arg("lemma"), py::arg("k"), py::arg("pos") = py::none())
        .def("classify", [](const SenseIndex& idx, const std::string& lemma, const FloatArray& q, std::size_t k,
                            Backoff backoff, std::optional<std::string> pos) {
            return idx.classify(WordKey{lemma, pos_arg(pos)}, to_vector(q), k, backoff);
        }, py::arg("lemma"), py::arg("query"), py::arg("k") = 1, py::arg("backoff") = Backoff::None,
           py::arg("pos") = py::none())
        .def("neighbors", [](const SenseIndex& idx, const std::string& lemma, const FloatArray& q, std::size_t n,
                             std::optional<std::string> pos) {
            return neighbor_list(idx.neighbors(WordKey{lemma, pos_arg(pos)}, to_vector(q), n));
        }, py::arg("lemma"), py::arg("query"), py::arg("n") = 5, py::arg("pos") = py::none())
        .def("mfs_predict", [](const SenseIndex& idx, const std::string& lemma, std::optional<std::string> pos) {
            return idx.mfs_predict(WordKey{lemma, pos_arg(pos)});
        }, py::arg("lemma"), py::arg("pos") = py::none())
        .def("save", [](const SenseIndex& idx) { return py::bytes(save_index(idx)); })
        .def("__eq__", [](const SenseIndex& a, const SenseIndex& b) { return a == b; });

    m.def("build_index", [](const Corpus& c, const VectorStore& s, Keying keying) {
        BuildReport report;
        SenseIndex idx = build_index(c, s, keying, &report);
        std::vector<std::string> missing;
        for (const auto& k : report.missing_vectors) {
            missing.push_back(k.str());
        }
        return py::make_tuple(std::move(idx), missing);
    }, py::arg("corpus"), py::arg("store"), py::arg("keying") = Keying::Lemma);
    m.def("load_index", [](const py::bytes& b) { return load_index(std::string(b)); });

    // Evaluation -----------------------------------------------------------
    py::class_<EvalResult>(m, "EvalResult")
        .def_readonly("attempted", &EvalResult::attempted)
        .def_readonly("correct", &EvalResult::correct)
        .def_readonly("total", &EvalResult::total)
        .def_readonly("precision", &EvalResult::precision)
        .def_readonly("recall", &EvalResult::recall)
        .def_readonly("f1", &EvalResult::f1)
        .def_readonly("missing_vectors", &EvalResult::missing_vectors)
        .def_readonly("abstained", &EvalResult::abstained);

    m.def("score", [](const std::vector<std::pair<std::string, std::optional<std::string>>>& answers,
                      const std::vector<std::pair<std::string, std::vector<std::string>>>& gold) {
        std::vector<SystemAnswer> a;
        for (const auto& [k, s] : answers) {
            a.push_back({InstanceKey::parse(k), s});
        }
        std::vector<GoldInstance> g;
        for (const auto& [k, s] : gold) {
            g.push_back({InstanceKey::parse(k), s, std::nullopt});
        }
        return score(a, g);
    }, py::arg("answers"), py::arg("gold"));
    m.def("evaluate", &evaluate, py::arg("index"), py::arg("test"), py::arg("store"), py::arg("k") = 1,
          py::arg("backoff") = Backoff::None, py::arg("keying") = Keying::Lemma);
    m.def("sweep_k", [](const SenseIndex& idx, const Corpus& test, const VectorStore& store,
                        std::vector<std::size_t> ks, Backoff backoff, Keying keying) {
        if (ks.empty()) {
            ks = default_k_grid();
        }
        return sweep_k(idx, test, store, ks, backoff, keying).rows;
    }, py::arg("index"), py::arg("test"), py::arg("store"), py::arg("ks") = std::vector<std::size_t>{},
       py::arg("backoff") = Backoff::None, py::arg("keying") = Keying::Lemma);
    m.def("evaluate_mfs", &evaluate_mfs, py::arg("index"), py::arg("test"), py::arg("keying") = Keying::Lemma);
    m.def("default_k_grid", &default_k_grid);
    m.def("render_table", [](const EvalResult& r, TableFormat f) { return render_table(r, f); },
          py::arg("result"), py::arg("format") = TableFormat::Tsv);

    // Projection -----------------------------------------------------------
    py::class_<ProjectionConfig>(m, "ProjectionConfig")
        .def(py::init<>())
        .def_readwrite("perplexity", &ProjectionConfig::perplexity)
        .def_readwrite("iterations", &ProjectionConfig::iterations)
        .def_readwrite("learning_rate", &ProjectionConfig::learning_rate)
        .def_readwrite("momentum", &ProjectionConfig::momentum)
        .def_readwrite("final_momentum", &ProjectionConfig::final_momentum)
        .def_readwrite("momentum_switch_iter", &ProjectionConfig::momentum_switch_iter)
        .def_readwrite("early_exaggeration_factor", &ProjectionConfig::early_exaggeration_factor)
        .def_readwrite("early_exaggeration_iters", &ProjectionConfig::early_exaggeration_iters)
        .def_readwrite("seed", &ProjectionConfig::seed)
        .def_readwrite("normalize", &ProjectionConfig::normalize);

    m.def("pairwise_affinities", [](const DoubleArray& x, double perplexity) {
        const Affinities a = pairwise_affinities(to_rows(x), perplexity);
        const auto n = static_cast<py::ssize_t>(a.p.n);
        DoubleArray p({n, n});
        std::copy(a.p.values.begin(), a.p.values.end(), p.mutable_data());
        return py::make_tuple(p, a.row_perplexity);
    });
    m.def("kl_gradient", [](const DoubleArray& p, const DoubleArray& y) {
        if (p.ndim() != 2 || p.shape(0) != p.shape(1) || y.ndim() != 2 || y.shape(1) != 2) {
            throw py::value_error("expected P of shape (n, n) and Y of shape (n, 2)");
        }
        SquareMatrix pm(static_cast<std::size_t>(p.shape(0)));
        std::copy(p.data(), p.data() + p.size(), pm.values.begin());
        std::vector<Point2D> pts(static_cast<std::size_t>(y.shape(0)));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            pts[i] = {y.data()[2 * i], y.data()[2 * i + 1]};
        }
        const KlGradient g = kl_gradient(pm, pts);
        DoubleArray grad({static_cast<py::ssize_t>(pts.size()), py::ssize_t{2}});
        for (std::size_t i = 0; i < pts.size(); ++i) {
            grad.mutable_data()[2 * i] = g.grad[i][0];
            grad.mutable_data()[2 * i + 1] = g.grad[i][1];
        }
        return py::make_tuple(g.kl, grad);
    });
    m.def("tsne", [](const DoubleArray& x, const std::vector<std::string>& labels,
                     const std::vector<std::string>& provenance, const ProjectionConfig& config) {
        const ProjectionResult r = tsne(to_rows(x), labels, provenance, config);
        const auto n = static_cast<py::ssize_t>(r.coords.points.size());
        DoubleArray y({n, py::ssize_t{2}});
        for (py::ssize_t i = 0; i < n; ++i) {
            y.mutable_data()[2 * i] = r.coords.points[static_cast<std::size_t>(i)].x;
            y.mutable_data()[2 * i + 1] = r.coords.points[static_cast<std::size_t>(i)].y;
        }
        std::vector<double> trace;
        for (const auto& t : r.trace) {
            trace.push_back(t.kl);
        }
        return py::make_tuple(y, trace, r.perplexity_used);
    }, py::arg("x"), py::arg("labels"), py::arg("provenance"), py::arg("config") = ProjectionConfig{});
    m.def("export_plot_data", [](const std::vector<std::tuple<double, double, std::string, std::string>>& rows,
                                 std::size_t min_label_frequency) {
        Coords2D c;
        for (const auto& [x, y, label, prov] : rows) {
            c.points.push_back({x, y, label, prov});
        }
        return export_plot_data(c, min_label_frequency);
    }, py::arg("points"), py::arg("min_label_frequency") = 2);
}
