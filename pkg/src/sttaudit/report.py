"""Assembles the audit report (machine JSON + human Markdown).

The report is deterministic given its inputs: no timestamps, sorted keys,
and sections that cannot be computed are marked absent with a reason
rather than dropped.
"""

from __future__ import annotations

import json
from pathlib import Path

from .corpus import Corpus, GroupSummary, SegmentFeatures, corpus_summary
from .detection import HallucinationCandidate, StabilityReport
from .harms import HARMFUL_GROUPS, HarmLabel, aggregate
from .stats import (
    GroupRateComparison,
    MatchResult,
    RegressionResult,
    format_regression_table,
    group_rate_comparison,
)
from .stores import confirmed_segment_ids


def _absent(reason: str) -> dict:
    return {"status": "absent", "reason": reason}


def _summary_dict(summary: dict[str, GroupSummary]) -> dict:
    return {
        group: {
            "segment_count": s.segment_count,
            "mean_word_count": s.mean_word_count,
            "mean_duration": s.mean_duration,
            "mean_word_speed": s.mean_word_speed,
        }
        for group, s in summary.items()
    }


def rates_section(comparison: GroupRateComparison) -> dict:
    return {
        "groups": {
            g: {
                "segments": r.segments,
                "confirmed": r.confirmed,
                "rate": r.rate,
                "rate_percent": round(100.0 * r.rate, 2),
            }
            for g, r in comparison.rates.items()
        },
        "test": {
            "statistic": comparison.test.statistic,
            "p_value": comparison.test.p_value,
            "method": comparison.test.method,
        },
    }


def regression_section(result: RegressionResult) -> dict:
    return {
        "coefficients": [
            {"name": c.name, "estimate": c.estimate, "standard_error": c.standard_error}
            for c in result.coefficients
        ],
        "log_likelihood": result.log_likelihood,
        "aic": result.aic,
        "n_observations": result.n_observations,
        "converged": result.converged,
        "iterations": result.iterations,
        "separation_warning": result.separation_warning,
        "table": format_regression_table(result),
    }


def match_section(result: MatchResult) -> dict:
    return {
        "n_matched": result.n_matched,
        "caliper_distance": result.caliper_distance,
        "ridge_applied": result.ridge_applied,
        "smd_before": result.smd_before,
        "smd_after": result.smd_after,
    }


def vad_group_means(
    corpus: Corpus,
    features: dict[str, SegmentFeatures],
    hallucinated_ids: set[str],
) -> dict[str, float | None]:
    """Mean non-vocal share for the four group x hallucination cells."""
    cells: dict[str, list[float]] = {
        "aphasia_hallucinated": [],
        "aphasia_clean": [],
        "control_hallucinated": [],
        "control_clean": [],
    }
    for segment_id, feats in features.items():
        if feats.nonvocal_share is None:
            continue
        group = corpus.group_of(segment_id)
        status = "hallucinated" if segment_id in hallucinated_ids else "clean"
        cells[f"{group}_{status}"].append(feats.nonvocal_share)
    return {
        cell: (sum(values) / len(values) if values else None)
        for cell, values in cells.items()
    }


def build_report_data(
    corpus: Corpus | None = None,
    features: dict[str, SegmentFeatures] | None = None,
    candidates: dict[str, HallucinationCandidate] | None = None,
    labels: list[HarmLabel] | None = None,
    regressions: dict[str, RegressionResult] | None = None,
    matches: dict[str, MatchResult] | None = None,
    stability: StabilityReport | None = None,
) -> dict:
    """Assemble every report section from whatever artifacts exist."""
    report: dict = {"sections": {}}
    sections = report["sections"]

    if corpus is None:
        sections["corpus"] = _absent("corpus not loaded")
    else:
        sections["corpus"] = {
            "total_segments": len(corpus),
            "total_speakers": len(corpus.speakers),
            "groups": _summary_dict(corpus_summary(corpus)),
        }

    confirmed = confirmed_segment_ids(candidates) if candidates else set()
    if candidates is None:
        sections["candidates"] = _absent("detection has not run")
    else:
        by_status: dict[str, int] = {"pending": 0, "confirmed": 0, "rejected": 0}
        for candidate in candidates.values():
            by_status[candidate.status] += 1
        sections["candidates"] = {"total": len(candidates), "by_status": by_status}

    if corpus is None or candidates is None:
        sections["rates"] = _absent("needs corpus and candidates")
    else:
        try:
            comparison = group_rate_comparison(confirmed, corpus)
            sections["rates"] = rates_section(comparison)
        except ValueError as exc:
            sections["rates"] = _absent(str(exc))

    if labels is None:
        sections["harms"] = _absent("no adjudication labels")
    else:
        dist = aggregate(labels, set(candidates) if candidates else None)
        sections["harms"] = {
            "total_confirmed": dist.total_confirmed,
            "per_category": dist.per_category,
            "broad_group_shares": dist.per_broad_group,
            "broad_group_percent": {
                g: round(100.0 * dist.per_broad_group[g]) for g in HARMFUL_GROUPS
            },
            "any_harm_share": dist.any_harm_share,
            "any_harm_percent": round(100.0 * dist.any_harm_share),
        }

    if corpus is None or features is None or not any(
        f.nonvocal_share is not None for f in (features or {}).values()
    ):
        sections["vad"] = _absent("VAD profiles not computed")
    else:
        sections["vad"] = {"group_mean_nonvocal_share": vad_group_means(corpus, features, confirmed)}

    sections["regressions"] = (
        {name: regression_section(r) for name, r in sorted(regressions.items())}
        if regressions
        else _absent("no regressions fitted")
    )
    sections["matching"] = (
        {name: match_section(m) for name, m in sorted(matches.items())}
        if matches
        else _absent("no matching performed")
    )
    sections["stability"] = (
        {
            "n_pairs": stability.n_pairs,
            "evaluated": len(stability.per_segment),
            "persistent": len(stability.persistent_ids),
            "summary": stability.summary,
            "by_group": {
                g: {"evaluated": s.evaluated, "flagged_any": s.flagged_any,
                    "persistent": s.persistent}
                for g, s in stability.by_group.items()
            },
        }
        if stability is not None
        else _absent("fewer than two run pairs")
    )
    return report


def _markdown_section(title: str, body: list[str]) -> list[str]:
    return [f"## {title}", ""] + body + [""]


def render_markdown(report: dict) -> str:
    """Human-readable Markdown rendering of the report data."""
    sections = report["sections"]
    out: list[str] = ["# Speech-to-Text Hallucination Audit Report", ""]

    def absent(section: dict) -> str | None:
        if isinstance(section, dict) and section.get("status") == "absent":
            return section["reason"]
        return None

    corpus = sections["corpus"]
    if (reason := absent(corpus)) is not None:
        out += _markdown_section("Corpus", [f"_absent: {reason}_"])
    else:
        lines = [f"Segments: {corpus['total_segments']}, speakers: {corpus['total_speakers']}", ""]
        lines.append("| group | segments | mean words | mean duration (s) | mean words/s |")
        lines.append("|---|---|---|---|---|")
        for group, s in sorted(corpus["groups"].items()):
            fmt = lambda v: "-" if v is None else f"{v:.2f}"
            lines.append(
                f"| {group} | {s['segment_count']} | {fmt(s['mean_word_count'])} "
                f"| {fmt(s['mean_duration'])} | {fmt(s['mean_word_speed'])} |"
            )
        out += _markdown_section("Corpus", lines)

    rates = sections["rates"]
    if (reason := absent(rates)) is not None:
        out += _markdown_section("Hallucination rates", [f"_absent: {reason}_"])
    else:
        lines = []
        for group, r in sorted(rates["groups"].items()):
            lines.append(f"- {group}: {r['confirmed']}/{r['segments']} = {r['rate_percent']}%")
        test = rates["test"]
        lines.append(
            f"- {test['method']}: statistic {test['statistic']:.3f}, p = {test['p_value']:.4f}"
        )
        out += _markdown_section("Hallucination rates", lines)

    harms = sections["harms"]
    if (reason := absent(harms)) is not None:
        out += _markdown_section("Harm distribution", [f"_absent: {reason}_"])
    else:
        lines = [f"Confirmed hallucinations: {harms['total_confirmed']}", ""]
        for group, pct in sorted(harms["broad_group_percent"].items()):
            lines.append(f"- {group}: {pct}%")
        lines.append(f"- any harmful category: {harms['any_harm_percent']}%")
        out += _markdown_section("Harm distribution", lines)

    vad = sections["vad"]
    if (reason := absent(vad)) is not None:
        out += _markdown_section("Non-vocal shares", [f"_absent: {reason}_"])
    else:
        lines = []
        for cell, mean in vad["group_mean_nonvocal_share"].items():
            value = "-" if mean is None else f"{100.0 * mean:.1f}%"
            lines.append(f"- {cell}: {value}")
        out += _markdown_section("Non-vocal shares", lines)

    regressions = sections["regressions"]
    if (reason := absent(regressions)) is not None:
        out += _markdown_section("Regressions", [f"_absent: {reason}_"])
    else:
        lines = []
        for name, reg in sorted(regressions.items()):
            lines += [f"### {name}", ""]
            if (entry_reason := absent(reg)) is not None:
                lines += [f"_absent: {entry_reason}_", ""]
            else:
                lines += ["```", reg["table"], "```", ""]
        out += _markdown_section("Regressions", lines)

    matching = sections["matching"]
    if (reason := absent(matching)) is not None:
        out += _markdown_section("Matching", [f"_absent: {reason}_"])
    else:
        lines = []
        for name, match in sorted(matching.items()):
            lines.append(f"### {name}")
            lines.append("")
            if (entry_reason := absent(match)) is not None:
                lines += [f"_absent: {entry_reason}_", ""]
                continue
            lines.append(f"Matched pairs: {match['n_matched']} (caliper distance "
                         f"{match['caliper_distance']:.4f})")
            lines.append("")
            lines.append("| covariate | SMD before | SMD after |")
            lines.append("|---|---|---|")
            for cov in sorted(match["smd_before"]):
                lines.append(
                    f"| {cov} | {match['smd_before'][cov]:.4f} | {match['smd_after'][cov]:.4f} |"
                )
            if "rates" in match and absent(match["rates"]) is None:
                lines.append("")
                for group, r in sorted(match["rates"]["groups"].items()):
                    lines.append(
                        f"- {group}: {r['confirmed']}/{r['segments']} = {r['rate_percent']}%"
                    )
                lines.append(
                    f"- p = {match['rates']['test']['p_value']:.4f}"
                )
            lines.append("")
        out += _markdown_section("Matching", lines)

    stability = sections["stability"]
    if (reason := absent(stability)) is not None:
        out += _markdown_section("Longitudinal stability", [f"_absent: {reason}_"])
    else:
        # either one flat entry or one entry per backend
        entries = (
            {"": stability} if "summary" in stability else dict(sorted(stability.items()))
        )
        lines = []
        for name, entry in entries.items():
            prefix = f"{name}: " if name else ""
            if (entry_reason := absent(entry)) is not None:
                lines.append(f"- {prefix}_absent: {entry_reason}_")
                continue
            lines.append(f"- {prefix}{entry['summary']} across {entry['n_pairs']} run pairs")
            for group, s in sorted(entry["by_group"].items()):
                lines.append(
                    f"  - {group}: {s['persistent']}/{s['evaluated']} persistent, "
                    f"{s['flagged_any']} flagged at least once"
                )
        out += _markdown_section("Longitudinal stability", lines)

    return "\n".join(out).rstrip() + "\n"


def export_report(report: dict, output_dir: str | Path) -> tuple[Path, Path]:
    """Write report.json and report.md; returns both paths."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    json_path = output_dir / "report.json"
    md_path = output_dir / "report.md"
    json_path.write_text(
        json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    md_path.write_text(render_markdown(report), encoding="utf-8")
    return json_path, md_path
