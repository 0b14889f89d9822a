"""Template assets, prompt composition, and warning parsing."""
from __future__ import annotations

import json
import logging
import shutil
from pathlib import Path

import pytest

import hazviz.prompts as prompts
from hazviz.errors import (
    DependencyError,
    IncompleteDescriptionsError,
    TemplateChecksumError,
    UnresolvedPlaceholderError,
    WarningParseError,
)
from hazviz.prompts import (
    PLACEHOLDER_NAMES,
    TEMPLATE_IDS,
    SceneDescriptionSet,
    compose_text_prompt,
    compose_visual_prompt,
    compute_template_checksums,
    parse_warning_spec,
    record_json,
    render_template,
    template_body,
    template_placeholders,
    verify_templates,
    write_template_checksums,
)

# ---------------------------------------------------------------------------
# Template assets


EXPECTED_PLACEHOLDERS = {
    "P_SP": {"event_keyword", "json_data"},
    "P_T1": {"json_data"},
    "P_T2": {"infrastructure_description", "json_data"},
    "P_T3": {"activity_description", "json_data"},
    "P_T4": {"activity_description", "json_data"},
    "V_SP": {"state_description"},
    "V_T1": {"state_description"},
    "V_T2": {"hazard_description", "state_description"},
    "V_T3": {"state_description"},
    "V_T4": {"state_description"},
}


def test_ten_templates_ship():
    assert len(TEMPLATE_IDS) == 10
    for template_id in TEMPLATE_IDS:
        assert template_body(template_id).strip()


def test_placeholder_vocabulary_is_closed():
    assert PLACEHOLDER_NAMES == {
        "json_data",
        "infrastructure_description",
        "activity_description",
        "hazard_description",
        "state_description",
        "event_keyword",
    }


@pytest.mark.parametrize("template_id", TEMPLATE_IDS)
def test_static_placeholder_scan(template_id):
    assert template_placeholders(template_id) == EXPECTED_PLACEHOLDERS[template_id]


def test_unknown_template_id_rejected():
    with pytest.raises(KeyError):
        template_body("P_T9")


def test_signature_template_phrases():
    # Anchor phrases that downstream behavior depends on.
    assert "no construction equipment or workers" in template_body("P_T1")
    assert "SAFETY_WARNING:" in template_body("P_T3")
    assert "Watch for pinch points" in template_body("P_T3")
    assert "CRITICAL POSITIONING REQUIREMENT" in template_body("V_T2")
    assert "Image Description:" in template_body("V_SP")
    assert "Worker Highlight Description:" in template_body("V_T3")


# ---------------------------------------------------------------------------
# Rendering


def test_render_substitutes_every_occurrence():
    rendered = render_template(
        "P_SP", {"json_data": "{JSON}", "event_keyword": "STRUCK BY"}
    )
    assert "{JSON}" in rendered
    assert "STRUCK BY" in rendered
    assert "{json_data}" not in rendered
    assert "{event_keyword}" not in rendered


def test_render_is_single_pass():
    # A bound value that itself looks like a placeholder must not be
    # re-expanded.
    rendered = render_template(
        "P_SP",
        {"json_data": "literal {event_keyword} stays", "event_keyword": "FALL"},
    )
    assert "literal {event_keyword} stays" in rendered


def test_render_missing_binding_raises():
    with pytest.raises(UnresolvedPlaceholderError) as excinfo:
        render_template("P_SP", {"json_data": "{}"})
    message = str(excinfo.value)
    assert "event_keyword" in message
    assert "P_SP" in message


def test_render_extra_binding_warns_and_ignores(caplog):
    with caplog.at_level(logging.WARNING, logger="hazviz.prompts"):
        rendered = render_template(
            "P_T1", {"json_data": "{}", "state_description": "unused"}
        )
    assert "unused" not in rendered
    assert any("state_description" in message for message in caplog.messages)


def test_render_is_deterministic():
    bindings = {"json_data": "{}", "event_keyword": "FALL"}
    assert render_template("P_SP", bindings) == render_template("P_SP", bindings)


def test_record_json_is_one_line_and_lossless(reference_record):
    serialized = record_json(reference_record)
    assert "\n" not in serialized
    assert json.loads(serialized) == dict(reference_record.fields)


# ---------------------------------------------------------------------------
# Text prompt composition


def test_compose_single_pass_binds_keyword_and_record(reference_record):
    rendered = compose_text_prompt("SP", reference_record)
    assert reference_record.event_keyword in rendered
    assert '"summary_nr": "323"' in rendered


def test_compose_t1_needs_only_the_record(reference_record):
    rendered = compose_text_prompt("T1", reference_record)
    assert '"naics_code": "237310"' in rendered


def test_compose_t2_requires_t1_text(reference_record):
    with pytest.raises(DependencyError, match="T1"):
        compose_text_prompt("T2", reference_record)
    with pytest.raises(DependencyError, match="T1"):
        compose_text_prompt(
            "T2", reference_record, priors=SceneDescriptionSet(mode="temporal")
        )
    priors = SceneDescriptionSet(mode="temporal", r_t1="Bare highway.")
    assert "Bare highway." in compose_text_prompt("T2", reference_record, priors=priors)


@pytest.mark.parametrize("stage", ["T3", "T4"])
def test_compose_t3_t4_require_t2_text_only(reference_record, stage):
    with pytest.raises(DependencyError, match="T2"):
        compose_text_prompt(stage, reference_record)
    # T3/T4 consume the T2 activity text and are independent of each other:
    # neither needs the other's output to compose.
    priors = SceneDescriptionSet(mode="temporal", r_t2="Crew rakes asphalt.")
    rendered = compose_text_prompt(stage, reference_record, priors=priors)
    assert "Crew rakes asphalt." in rendered


def test_compose_t3_t4_do_not_see_each_other(reference_record):
    # Adding the sibling's text to the priors must not change the render.
    base = SceneDescriptionSet(mode="temporal", r_t2="Crew rakes asphalt.")
    enriched = SceneDescriptionSet(
        mode="temporal",
        r_t2="Crew rakes asphalt.",
        r_t3="SIBLING T3",
        r_t4="SIBLING T4",
    )
    for stage in ("T3", "T4"):
        assert compose_text_prompt(
            stage, reference_record, priors=base
        ) == compose_text_prompt(stage, reference_record, priors=enriched)


def test_compose_unknown_stage(reference_record):
    with pytest.raises(KeyError):
        compose_text_prompt("T5", reference_record)


# ---------------------------------------------------------------------------
# Visual prompt composition


def test_visual_sp_embeds_description(reference_descriptions):
    descriptions = reference_descriptions["single_pass"]
    rendered = compose_visual_prompt("SP", descriptions)
    assert descriptions.r_sp in rendered
    assert rendered.index("Image Description:") < rendered.index(descriptions.r_sp)


def test_visual_t2_embeds_activity_and_hazard(reference_descriptions):
    descriptions = reference_descriptions["temporal"]
    rendered = compose_visual_prompt("T2", descriptions)
    assert descriptions.r_t2 in rendered
    assert descriptions.r_t4 in rendered


def test_visual_t3_embeds_raw_warning_stage_text(reference_descriptions):
    descriptions = reference_descriptions["temporal"]
    rendered = compose_visual_prompt("T3", descriptions)
    # The raw two-line text goes in whole: highlight plus SAFETY_WARNING line.
    assert descriptions.r_t3 in rendered
    assert "SAFETY_WARNING: Watch for vehicles leaving roadway" in rendered


def test_visual_dependency_errors():
    empty_single = SceneDescriptionSet(mode="single_pass")
    with pytest.raises(DependencyError):
        compose_visual_prompt("SP", empty_single)
    partial = SceneDescriptionSet(mode="temporal", r_t2="activity")
    with pytest.raises(DependencyError):
        compose_visual_prompt("T2", partial)  # r_t4 missing
    with pytest.raises(DependencyError):
        compose_visual_prompt("T3", partial)
    with pytest.raises(DependencyError):
        compose_visual_prompt("T1", partial)
    with pytest.raises(DependencyError):
        compose_visual_prompt("T4", partial)


# ---------------------------------------------------------------------------
# Warning parsing


def test_parse_warning_two_line_case():
    spec = parse_warning_spec(
        "The worker behind the truck should be highlighted.\n"
        "SAFETY_WARNING: Stay clear of reversing trucks"
    )
    assert spec.highlight_description == "The worker behind the truck should be highlighted."
    assert spec.warning_phrase == "Stay clear of reversing trucks"
    assert spec.phrase_word_count == 5
    assert spec.phrase_in_range is True


def test_parse_warning_multiline_preamble():
    spec = parse_warning_spec(
        "Line one of the highlight.\nLine two of the highlight.\n"
        "SAFETY_WARNING: Watch for vehicles leaving roadway\n"
        "trailing commentary is not part of the phrase"
    )
    assert spec.highlight_description == (
        "Line one of the highlight.\nLine two of the highlight."
    )
    assert spec.warning_phrase == "Watch for vehicles leaving roadway"


def test_parse_warning_tolerates_markdown_residue():
    for line in (
        "- SAFETY_WARNING: Watch for overhead hazards now",
        "  * SAFETY_WARNING : Watch for overhead hazards now",
        "> SAFETY_WARNING:Watch for overhead hazards now",
        "#SAFETY_WARNING: Watch for overhead hazards now",
    ):
        spec = parse_warning_spec(f"Highlight the rigger.\n{line}")
        assert spec.warning_phrase == "Watch for overhead hazards now"


def test_parse_warning_first_line_wins():
    spec = parse_warning_spec(
        "Highlight.\nSAFETY_WARNING: First warning phrase here now\n"
        "SAFETY_WARNING: second phrase"
    )
    assert spec.warning_phrase.startswith("First")


def test_parse_warning_flags_out_of_range_phrases():
    short = parse_warning_spec("H.\nSAFETY_WARNING: Too short")
    assert short.phrase_word_count == 2
    assert short.phrase_in_range is False
    long = parse_warning_spec(
        "H.\nSAFETY_WARNING: This phrase runs on for nine whole words total"
    )
    assert long.phrase_word_count == 9
    assert long.phrase_in_range is False
    empty = parse_warning_spec("H.\nSAFETY_WARNING:")
    assert empty.warning_phrase == ""
    assert empty.phrase_word_count == 0
    assert empty.phrase_in_range is False
    seven = parse_warning_spec(
        "H.\nSAFETY_WARNING: one two three four five six seven"
    )
    assert seven.phrase_in_range is True


def test_parse_warning_missing_line_raises_with_raw_text():
    raw = "A response that forgot the required warning line entirely."
    with pytest.raises(WarningParseError) as excinfo:
        parse_warning_spec(raw)
    assert excinfo.value.raw_text == raw


# ---------------------------------------------------------------------------
# Description sets


def test_description_set_completeness_single_pass():
    described = SceneDescriptionSet(mode="single_pass", r_sp="scene")
    assert described.is_complete()
    described.validate()
    empty = SceneDescriptionSet(mode="single_pass")
    assert not empty.is_complete()
    with pytest.raises(IncompleteDescriptionsError, match="r_sp"):
        empty.validate()


def test_description_set_completeness_temporal(reference_descriptions):
    complete = reference_descriptions["temporal"]
    assert complete.is_complete()
    complete.validate()
    partial = SceneDescriptionSet(mode="temporal", r_t1="a", r_t2="b")
    with pytest.raises(IncompleteDescriptionsError) as excinfo:
        partial.validate()
    message = str(excinfo.value)
    for name in ("r_t3", "r_t4", "warning"):
        assert name in message
    assert "r_t1" not in message


def test_description_set_unknown_mode():
    with pytest.raises(IncompleteDescriptionsError, match="mode"):
        SceneDescriptionSet(mode="triple_pass").validate()


def test_description_set_json_round_trip(reference_descriptions):
    for described in reference_descriptions.values():
        clone = SceneDescriptionSet.from_json_dict(described.to_json_dict())
        assert clone == described


# ---------------------------------------------------------------------------
# Checksums


def test_checksums_cover_all_templates():
    sums = compute_template_checksums()
    assert set(sums) == {f"{template_id}.txt" for template_id in TEMPLATE_IDS}
    for digest in sums.values():
        assert len(digest) == 64


def test_bundled_checksums_verify():
    verify_templates()


def test_tampered_template_detected(tmp_path, monkeypatch):
    source = Path(prompts.__file__).parent / "templates"
    target = tmp_path / "templates"
    shutil.copytree(source, target)
    (target / "P_T1.txt").write_text("tampered body", encoding="utf-8")
    monkeypatch.setattr(prompts, "_templates_root", lambda: target)
    monkeypatch.setattr(prompts, "_template_cache", {})
    with pytest.raises(TemplateChecksumError, match="P_T1"):
        verify_templates()


def test_unrecorded_template_detected(tmp_path, monkeypatch):
    source = Path(prompts.__file__).parent / "templates"
    target = tmp_path / "templates"
    shutil.copytree(source, target)
    recorded = json.loads((target / "checksums.json").read_text(encoding="utf-8"))
    recorded.pop("V_T4.txt")
    (target / "checksums.json").write_text(json.dumps(recorded), encoding="utf-8")
    monkeypatch.setattr(prompts, "_templates_root", lambda: target)
    with pytest.raises(TemplateChecksumError, match="V_T4"):
        verify_templates()


def test_write_template_checksums_round_trip(tmp_path):
    out = write_template_checksums(tmp_path / "sums.json")
    recorded = json.loads(out.read_text(encoding="utf-8"))
    assert recorded == compute_template_checksums()
