#ifndef VOICEGATE_VOICEGATE_HPP
#define VOICEGATE_VOICEGATE_HPP

#include "access_control.hpp"
#include "clip_features.hpp"
#include "config.hpp"
#include "corpus.hpp"
#include "error.hpp"
#include "evaluation.hpp"
#include "fft.hpp"
#include "knn.hpp"
#include "mfcc.hpp"
#include "model_file.hpp"
#include "pipeline.hpp"
#include "signal.hpp"
#include "synth.hpp"
#include "wav.hpp"
#include "wavelet.hpp"

#endif
