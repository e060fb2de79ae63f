#ifndef OCEANPROV_OCEANPROV_HPP
#define OCEANPROV_OCEANPROV_HPP

// Umbrella header for the whole library.

#include "cluster/clusterset.hpp"
#include "cluster/dbscan.hpp"
#include "cluster/kmeans.hpp"
#include "cluster/ward.hpp"
#include "cvi.hpp"
#include "embedding/curve.hpp"
#include "embedding/embed.hpp"
#include "embedding/fuzzy.hpp"
#include "embedding/knn.hpp"
#include "embedding/optimize.hpp"
#include "embedding/quality.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "matrix.hpp"
#include "nemi.hpp"
#include "pipeline.hpp"
#include "registration.hpp"
#include "similarity.hpp"
#include "sweep.hpp"
#include "synth.hpp"

#endif
