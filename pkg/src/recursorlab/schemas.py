"""JSON schemas for every subcommand's output document."""

from __future__ import annotations

_S = "https://json-schema.org/draft/2020-12/schema"
_ANY = {}
_INT = {"type": "integer"}
_STR = {"type": "string"}
_BOOL = {"type": "boolean"}
_NUM_OR_STR = {"type": ["string", "number"]}
_NULLABLE_STR = {"type": ["string", "null"]}


def _obj(props: dict, required=None, extra: bool = True) -> dict:
    return {
        "type": "object",
        "properties": props,
        "required": sorted(props if required is None else required),
        "additionalProperties": extra,
    }


def _doc(title: str, body: dict) -> dict:
    return {"$schema": _S, "title": title, **body}


_CERT = _obj(
    {"entry_name": _STR, "level": _INT, "kind": {"enum": ["constructive-pump", "declared"]},
     "boundary_condition": _STR, "pump": {"type": "object"}, "license": _STR},
    required=["entry_name", "level", "kind", "boundary_condition"],
)
_VERDICT = _obj(
    {"outcome": {"enum": ["oriented", "refuted", "not-oriented"]}, "method": _STR, "evidence": {"type": "array"},
     "witness": _ANY, "attempted": _ANY, "failing_rule": _NULLABLE_STR, "pump": {"type": "object"}},
    required=["outcome", "method", "evidence"],
)
_RECORD = _obj(
    {
        "kind": {"enum": ["T3", "T4"]},
        "obligation": _obj({"trs": _STR, "trs_text": _STR, "input": {"type": "object"}}),
        "level": {"type": ["integer", "null"]},
        "license_name": _NULLABLE_STR,
        "framework": _NULLABLE_STR,
        "dimension": _NULLABLE_STR,
        "residual": {"type": ["object", "null"]},
        "tried_languages": {"type": "object"},
        "boundary_condition": _NULLABLE_STR,
        "unresolved": {"type": ["boolean", "null"]},
        "kappa_star": {"type": ["integer", "string", "null"]},
        "certificates": {"type": "array", "items": _CERT},
        "steps_consumed": _INT,
        "step_bound": _INT,
    },
    extra=False,
)
_ERROR = _obj({"error": _obj({"type": _STR, "message": _STR})})

SCHEMAS = {
    "parse": _obj(
        {"name": _STR, "signature": {"type": "array"}, "rules": {"type": "array"}, "text": _STR,
         "normal_form": _STR, "firings": _INT, "exhausted": _BOOL},
        required=["name", "signature", "rules", "text"],
    ),
    "trace": _obj(
        {"a": _STR, "b": _STR, "k": _INT, "firings": _INT, "terminal": _STR,
         "steps": {"type": "array", "items": _obj(
             {"index": _INT, "term": _STR, "fired_rule": _STR, "g_frames": _INT, "pay": _INT, "ctr": _INT},
             required=["index", "term", "fired_rule"])}},
        required=["a", "b", "k", "firings", "terminal", "steps"],
    ),
    "orient": _VERDICT,
    "dp": _obj({"problem": {"type": "object"}, "base_order": {"type": "object"}}),
    "confess": _obj(
        {"forgetting_witness": {"type": "object"}, "problem": {"type": "object"}, "base_order": {"type": "object"},
         "account": {"type": "object"}, "rank_table": {"type": "array", "items": _INT}},
    ),
    "diagnose": _obj(
        {"k": _INT, "payload_size": _INT, "con": _NUM_OR_STR, "res": _INT, "hproof_curve": {"type": "array"},
         "eta": {"type": ["number", "null"]}, "description_gap": {"type": "array"}},
        required=["k", "payload_size", "con", "res", "hproof_curve"],
    ),
    "kappa": _obj({"kappa_star": {"type": ["integer", "string"]}, "ob": _BOOL, "per_level": {"type": "object"}}),
    "supervise": _RECORD,
    "audit": _obj(
        {"valid": _BOOL, "violations": {"type": "array", "items": _obj(
            {"type": _STR, "detail": _STR, "found": _INT, "required": _INT}, required=["type"])}},
    ),
    "necessity": _obj(
        {"maxDepth": _INT, "enumerated": _INT, "counterexamples": _INT, "count_identity_failures": _INT,
         "first_counterexample": _NULLABLE_STR, "analysis": {"type": "object"}},
        required=["maxDepth", "enumerated", "counterexamples"],
    ),
    "family": _obj({"members": {"type": "array"}, "blocked_iff_duplicating": _BOOL}),
    "sweep": {"type": "string", "contentMediaType": "text/csv",
              "description": "CSV with header k,|b|,con,res,ratio,eta,hproof_max"},
}


def schema_for(command: str) -> dict:
    body = SCHEMAS[command]
    if command == "sweep":
        return _doc(command, body)
    return _doc(command, {"anyOf": [body, _ERROR]})
