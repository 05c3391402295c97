#include "cli_common.hpp"
#include "commands.hpp"

#include "gastmix/composition.hpp"
#include "gastmix/error.hpp"
#include "gastmix/hash.hpp"
#include "gastmix/manifest.hpp"

#include <fstream>
#include <iostream>

namespace gastmix::cli {

using nlohmann::json;

namespace {

struct AggregateOpts {
    std::uint64_t seed = 0;
    std::string sentences;
    std::string predictions;
    std::string lexicon, veto;
    bool no_inflect = false;
    std::string window = "all";
    std::size_t min_support = 30;
    std::string out;
};

void run_aggregate(const AggregateOpts& o) {
    fail_if_missing(o.sentences, "sentence file");
    fail_if_missing(o.predictions, "predictions file");
    auto g = build_gazetteer(o.lexicon, o.veto, !o.no_inflect);

    const auto records = load_sentences_jsonl(o.sentences);
    std::unordered_map<std::uint64_t, bool> pred_by_id;
    {
        std::ifstream in(o.predictions, std::ios::binary);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            const auto t1 = line.find('\t');
            const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
            if (t2 == std::string::npos)
                throw DataError(o.predictions + ":" + std::to_string(line_no) +
                                ": expected sentence_id<TAB>probability<TAB>label");
            pred_by_id[from_hex(line.substr(0, t1))] = line.substr(t2 + 1) == "1";
        }
    }

    std::vector<corpus::Sentence> sentences;
    std::vector<bool> positive;
    std::unordered_map<std::string, composition::ReviewMeta> reviews;
    for (const auto& r : records) {
        const auto it = pred_by_id.find(r.sentence.sentence_id);
        if (it == pred_by_id.end()) continue;  // sentences without a prediction are skipped
        sentences.push_back(r.sentence);
        positive.push_back(it->second);
        reviews[r.sentence.review_id] = {r.business_id, r.date};
    }

    const auto mentions = composition::extract_mentions(sentences, positive, *g, reviews);
    const auto estimates =
        composition::aggregate(mentions.records, composition::parse_window(o.window), o.min_support);

    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write: " + o.out);
    for (const auto& est : estimates) {
        json j{{"business_id", est.business_id},
               {"window", est.window},
               {"support", est.support},
               {"counts", est.counts},
               {"shares", est.shares}};
        if (est.window_start) j["window_start"] = est.window_start->iso();
        if (est.window_end) j["window_end"] = est.window_end->iso();
        out << j.dump() << '\n';
    }
    out.close();
    std::cout << "mentions: " << mentions.records.size() << " (unattributed positives "
              << mentions.unattributed << ")\nestimates: " << estimates.size() << '\n';

    manifest::ManifestWriter mw("aggregate", json{{"seed", o.seed},
                                                  {"sentences", o.sentences},
                                                  {"predictions", o.predictions},
                                                  {"lexicon", o.lexicon},
                                                  {"window", o.window},
                                                  {"min_support", o.min_support},
                                                  {"mentions", mentions.records.size()},
                                                  {"unattributed", mentions.unattributed}}
                                     .dump());
    mw.add_input(o.sentences);
    mw.add_input(o.predictions);
    mw.add_input(o.lexicon);
    mw.add_output(o.out);
    mw.write(o.out + ".manifest.json");
}

struct ExportOpts {
    std::uint64_t seed = 0;
    std::string composition;
    std::string locations;
    std::string out;
    std::string unplaced;
};

void run_export(const ExportOpts& o) {
    fail_if_missing(o.composition, "composition file");
    fail_if_missing(o.locations, "locations file");

    std::vector<composition::CompositionEstimate> estimates;
    {
        std::ifstream in(o.composition, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const json j = json::parse(line);
            composition::CompositionEstimate est;
            est.business_id = j.at("business_id").get<std::string>();
            est.window = j.at("window").get<std::string>();
            est.support = j.at("support").get<std::size_t>();
            if (j.contains("counts"))
                est.counts = j["counts"].get<std::map<std::string, std::size_t>>();
            est.shares = j.at("shares").get<std::map<std::string, double>>();
            if (j.contains("window_start")) est.window_start = corpus::Date::parse(j["window_start"].get<std::string>());
            if (j.contains("window_end")) est.window_end = corpus::Date::parse(j["window_end"].get<std::string>());
            estimates.push_back(std::move(est));
        }
    }

    const auto locations = composition::load_locations(o.locations);
    const auto result = composition::export_geojson(estimates, locations);

    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write: " + o.out);
    out << result.geojson;
    out.close();

    if (!o.unplaced.empty()) {
        std::ofstream up(o.unplaced, std::ios::binary | std::ios::trunc);
        if (!up) throw DataError("cannot write: " + o.unplaced);
        for (const auto& est : result.unplaced) {
            up << json{{"business_id", est.business_id}, {"window", est.window}, {"support", est.support}}
                      .dump()
               << '\n';
        }
    }
    std::cout << "features: " << estimates.size() - result.unplaced.size() << ", without coordinates: "
              << result.unplaced.size() << '\n';

    manifest::ManifestWriter mw("export-geojson",
                                json{{"seed", o.seed},
                                     {"composition", o.composition},
                                     {"locations", o.locations}}
                                    .dump());
    mw.add_input(o.composition);
    mw.add_input(o.locations);
    mw.add_output(o.out);
    if (!o.unplaced.empty()) mw.add_output(o.unplaced);
    mw.write(o.out + ".manifest.json");
}

} // namespace

void register_composition_commands(CLI::App& app, const Settings& cfg) {
    {
        auto o = std::make_shared<AggregateOpts>();
        o->seed = cfg.get("seed", o->seed);
        o->window = cfg.get("window", o->window);
        o->min_support = cfg.get("min_support", static_cast<std::uint64_t>(o->min_support));
        auto* cmd = app.add_subcommand("aggregate",
                                       "Turn positive detections into per-business composition estimates");
        cmd->add_option("--sentences", o->sentences)->required();
        cmd->add_option("--predictions", o->predictions, "predictions TSV from `predict`")->required();
        cmd->add_option("--lexicon", o->lexicon)->required();
        cmd->add_option("--veto", o->veto);
        cmd->add_flag("--no-inflect", o->no_inflect);
        cmd->add_option("--window", o->window, "all | month | quarter");
        cmd->add_option("--min-support", o->min_support, "suppress groups with fewer mentions");
        cmd->add_option("--out", o->out, "composition JSONL")->required();
        cmd->callback([o] { run_aggregate(*o); });
    }
    {
        auto o = std::make_shared<ExportOpts>();
        o->seed = cfg.get("seed", o->seed);
        auto* cmd = app.add_subcommand("export-geojson", "Write composition estimates as GeoJSON points");
        cmd->add_option("--composition", o->composition)->required();
        cmd->add_option("--locations", o->locations, "CSV business_id,lat,lon")->required();
        cmd->add_option("--out", o->out, "GeoJSON FeatureCollection")->required();
        cmd->add_option("--unplaced", o->unplaced, "estimates without coordinates, JSONL");
        cmd->callback([o] { run_export(*o); });
    }
}

} // namespace gastmix::cli
