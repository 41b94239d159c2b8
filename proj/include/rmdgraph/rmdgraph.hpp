#pragma once

// Rank-modulated-degree graph construction for spectral clustering and
// graph-based semi-supervised learning on unbalanced, proximal data.

#include "rmdgraph/dataset.hpp"
#include "rmdgraph/evaluate.hpp"
#include "rmdgraph/graph.hpp"
#include "rmdgraph/parallel.hpp"
#include "rmdgraph/pipeline.hpp"
#include "rmdgraph/rank.hpp"
#include "rmdgraph/rng.hpp"
#include "rmdgraph/select.hpp"
#include "rmdgraph/spectral.hpp"
#include "rmdgraph/ssl.hpp"
#include "rmdgraph/theory.hpp"
