// Writes the authored fixture corpus (and its config) into a directory.

#include "fixture_corpus.hpp"

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <output-dir>\n";
        return 3;
    }
    const std::filesystem::path dir = argv[1];
    try {
        for (const auto& path : ssaudit::fixtures::write_corpus(dir)) std::cout << path.string() << '\n';
        std::ofstream(dir / "corpus-config.json") << ssaudit::fixtures::corpus_config_json();
    } catch (const std::exception& e) {
        std::cerr << "make_fixtures: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
