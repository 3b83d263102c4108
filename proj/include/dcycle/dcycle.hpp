#pragma once

// Umbrella header.

#include <dcycle/clean.hpp>
#include <dcycle/clustering.hpp>
#include <dcycle/config.hpp>
#include <dcycle/error.hpp>
#include <dcycle/evaluation.hpp>
#include <dcycle/features.hpp>
#include <dcycle/format.hpp>
#include <dcycle/log.hpp>
#include <dcycle/matrix.hpp>
#include <dcycle/pca.hpp>
#include <dcycle/pipeline.hpp>
#include <dcycle/report.hpp>
#include <dcycle/rng.hpp>
#include <dcycle/segmentation.hpp>
#include <dcycle/synthesis.hpp>
#include <dcycle/synthgen.hpp>
#include <dcycle/trace.hpp>
