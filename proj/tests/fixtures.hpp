#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

#include "mindpres/corpus.hpp"
#include "mindpres/training.hpp"

namespace fixture {

inline const mindpres::evaluator::ModelBundle& trained_bundle()
{
    static const auto bundle = [] {
        mindpres::evaluator::TrainingOptions options;
        options.seed = 42;
        return mindpres::evaluator::train_and_select(mindpres::corpus::generate(42, 100, 100), options).bundle;
    }();
    return bundle;
}

/// Scratch directory unique to this process.
inline std::filesystem::path scratch(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("mindpres-test-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace fixture
