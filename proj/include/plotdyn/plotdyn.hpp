#pragma once

#include "arc.hpp"
#include "artifact.hpp"
#include "cluster.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "features.hpp"
#include "kmeans.hpp"
#include "labelset.hpp"
#include "lexicon.hpp"
#include "metrics.hpp"
#include "naive_bayes.hpp"
#include "pca.hpp"
#include "pipeline.hpp"
#include "scores.hpp"
#include "svg.hpp"
#include "util.hpp"
