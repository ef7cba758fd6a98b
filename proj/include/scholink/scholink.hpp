#pragma once

#include "scholink/binary_io.hpp"
#include "scholink/dataset.hpp"
#include "scholink/error.hpp"
#include "scholink/eval.hpp"
#include "scholink/http_client.hpp"
#include "scholink/kg_embed.hpp"
#include "scholink/kg_store.hpp"
#include "scholink/label_index.hpp"
#include "scholink/ntriples.hpp"
#include "scholink/pipeline.hpp"
#include "scholink/reranker.hpp"
#include "scholink/service.hpp"
#include "scholink/span_detector.hpp"
#include "scholink/text.hpp"
#include "scholink/text_encoder.hpp"
#include "scholink/training_data.hpp"
