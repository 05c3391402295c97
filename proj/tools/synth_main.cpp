#include "gastmix/error.hpp"
#include "gastmix/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

// Standalone generator for the synthetic German review corpus used by the
// acceptance suite and the README walkthrough.

int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic German hotel-review corpus"};

    gastmix::synth::SynthConfig cfg;
    std::string out_dir;
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--reviews", cfg.n_reviews, "number of reviews");
    app.add_option("--seed", cfg.seed);
    app.add_option("--typo-rate", cfg.typo_rate);
    app.add_option("--slang-rate", cfg.slang_rate);
    app.add_option("--dim", cfg.embedding_dim, "embedding dimension");
    app.add_option("--businesses", cfg.n_businesses);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        std::filesystem::create_directories(out_dir);
        const auto sum = gastmix::synth::generate(cfg, out_dir);
        std::cout << "reviews: " << sum.reviews << "\nsentence instances: " << sum.sentences
                  << "\ndistinct sentences: " << sum.distinct_sentences << " (" << sum.positives
                  << " positive)\nembedding vocabulary: " << sum.vocabulary << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
