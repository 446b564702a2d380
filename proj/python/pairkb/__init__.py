# Copyright 2026 The PairKB Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Audio-text pair knowledge bases: retrieval, refinement and evaluation."""

from ._pairkb import (
    KnowledgeBase,
    PairEntry,
    PairKBError,
    generate_corpus,
    generate_queries,
    interleaved_context,
    load_store,
    recall_at_k,
    refine,
    retrieve,
    save_store,
    search_index,
    toy_kb,
    weight_sweep,
    zero_shot_accuracy,
    zero_shot_classify,
)

__all__ = [
    "KnowledgeBase",
    "PairEntry",
    "PairKBError",
    "generate_corpus",
    "generate_queries",
    "interleaved_context",
    "load_store",
    "recall_at_k",
    "refine",
    "retrieve",
    "save_store",
    "search_index",
    "toy_kb",
    "weight_sweep",
    "zero_shot_accuracy",
    "zero_shot_classify",
]
