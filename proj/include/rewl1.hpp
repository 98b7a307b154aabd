#ifndef REWL1_HPP
#define REWL1_HPP

#include <rewl1/types.hpp>
#include <rewl1/rng.hpp>
#include <rewl1/ensembles.hpp>
#include <rewl1/lp_ipm.hpp>
#include <rewl1/convex.hpp>
#include <rewl1/bpdn.hpp>
#include <rewl1/weights.hpp>
#include <rewl1/reweight.hpp>
#include <rewl1/oracle.hpp>
#include <rewl1/image.hpp>
#include <rewl1/fourier.hpp>
#include <rewl1/tv.hpp>
#include <rewl1/analysis.hpp>
#include <rewl1/io.hpp>
#include <rewl1/config.hpp>
#include <rewl1/experiments.hpp>

#endif  // REWL1_HPP
