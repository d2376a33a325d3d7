"""Control flow graph similarity and automated grading."""

from ._core import (
    BasicBlock,
    Cfg,
    EngineConfig,
    Error,
    Function,
    GradeModel,
    InputError,
    Instruction,
    Matching,
    NumericError,
    ParseError,
    Program,
    SimilarityMatrix,
    SimilarityMode,
    compute_x3,
    content_similarity,
    edit_distance,
    feedback_band,
    fit,
    graph_similarity,
    iterate_similarity,
    match_nodes,
    model_from_json,
    model_to_json,
    parse_program,
    predict,
    rescale_x3,
    solve_max_assignment,
    subst_cost,
    to_text,
)

__all__ = [name for name in dir() if not name.startswith("_")]
