/** Pure HTML renderers: one per pipeline event kind, plus artifact bodies.
 *
 * Every function returns an HTML string; nothing here touches the DOM, so
 * the renderers are unit-testable in Node. Unknown event kinds fall back to
 * pretty-printed JSON rather than being dropped.
 */

import { erdToSvg } from "./erd.js";
import type { PipelineEvent } from "./types.js";

export function esc(text: unknown): string {
  return String(text)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const SQL_KEYWORDS =
  /\b(SELECT|FROM|WHERE|JOIN|LEFT|RIGHT|INNER|OUTER|ON|GROUP BY|ORDER BY|HAVING|LIMIT|AS|AND|OR|NOT|IN|IS|NULL|COUNT|SUM|AVG|MIN|MAX|DISTINCT|CASE|WHEN|THEN|ELSE|END|UNION|WITH|INSERT|UPDATE|DELETE|CREATE|TABLE)\b/gi;

export function highlightSql(sql: string): string {
  return esc(sql).replace(SQL_KEYWORDS, (m) => `<span class="kw">${m}</span>`);
}

export function sqlBlock(sql: string): string {
  return `<pre class="sql"><code>${highlightSql(sql)}</code></pre>`;
}

function num(value: unknown, digits = 3): string {
  const n = Number(value);
  return Number.isFinite(n) ? n.toFixed(digits) : esc(value);
}

function chip(label: string, value: unknown): string {
  return `<span class="chip">${esc(label)}: <b>${esc(value)}</b></span>`;
}

function rawJson(value: unknown): string {
  return `<pre class="raw">${esc(JSON.stringify(value, null, 2))}</pre>`;
}

export function dataTable(
  columns: unknown[],
  rows: unknown[][],
  maxRows = 20,
): string {
  const head = columns.map((c) => `<th>${esc(c)}</th>`).join("");
  const body = rows
    .slice(0, maxRows)
    .map(
      (row) => `<tr>${row.map((v) => `<td>${esc(v ?? "")}</td>`).join("")}</tr>`,
    )
    .join("");
  const note =
    rows.length > maxRows
      ? `<div class="note">showing ${maxRows} of ${rows.length} rows</div>`
      : "";
  return `<table class="data"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>${note}`;
}

interface ReportEstimate {
  ate?: number;
  ci_low?: number;
  ci_high?: number;
  n_used?: number;
  method?: string;
}

interface ReportBody {
  question?: string;
  treatment?: string;
  outcome?: string;
  status?: string;
  estimand?: { adjustment_set?: string[]; expression?: string };
  estimate?: ReportEstimate | null;
  refutation?: { technique?: string; verdict?: string; detail?: string } | null;
  interpretation?: string;
  rows_used?: number;
  error?: string | null;
}

/** The estimation report as a card: ATE, CI, method, refuter verdict, text. */
export function reportCard(body: ReportBody): string {
  if (body.status === "error" || body.error) {
    return (
      `<div class="card report error"><div class="card-title">analysis failed</div>` +
      `<p>${esc(body.error ?? "unknown error")}</p></div>`
    );
  }
  const est = body.estimate ?? {};
  const refutation = body.refutation;
  const verdictClass =
    refutation?.verdict === "passed" ? "ok" : refutation ? "warn" : "";
  const adjustment = body.estimand?.adjustment_set ?? [];
  return (
    `<div class="card report"><div class="card-title">effect estimate</div>` +
    `<div class="ate">${num(est.ate)}</div>` +
    `<div class="ci">95% CI [${num(est.ci_low)}, ${num(est.ci_high)}]</div>` +
    `<div class="chips">` +
    chip("treatment", body.treatment ?? "?") +
    chip("outcome", body.outcome ?? "?") +
    chip("method", est.method ?? "?") +
    chip("n", est.n_used ?? "?") +
    chip("adjusting for", adjustment.length ? adjustment.join(", ") : "∅") +
    `</div>` +
    (refutation
      ? `<div class="verdict ${verdictClass}">refutation ${esc(
          refutation.technique ?? "",
        )}: <b>${esc(refutation.verdict ?? "")}</b><span class="detail">${esc(
          refutation.detail ?? "",
        )}</span></div>`
      : `<div class="verdict">no refutation run</div>`) +
    (body.interpretation
      ? `<p class="interpretation">${esc(body.interpretation)}</p>`
      : "")
  ) + `</div>`;
}

/** Render an artifact body by kind (erd | trace | dataset_preview | report). */
export function renderArtifact(kind: string, body: unknown): string {
  if (kind === "erd" && typeof body === "string") {
    const svg = erdToSvg(body);
    return svg ?? `<pre class="raw">${esc(body)}</pre>`;
  }
  if (kind === "report" && body && typeof body === "object") {
    return reportCard(body as ReportBody);
  }
  if (kind === "dataset_preview" && body && typeof body === "object") {
    const preview = body as { columns?: unknown[]; rows?: unknown[][] };
    if (Array.isArray(preview.columns) && Array.isArray(preview.rows)) {
      return (
        `<div class="card"><div class="card-title">dataset preview</div>` +
        dataTable(preview.columns, preview.rows) +
        `</div>`
      );
    }
  }
  if (kind === "trace" && body && typeof body === "object") {
    const trace = body as { final_sql?: string; status?: string };
    return (
      `<div class="card"><div class="card-title">sql trace · ${esc(
        trace.status ?? "?",
      )}</div>` +
      (trace.final_sql ? sqlBlock(trace.final_sql) : rawJson(body)) +
      `</div>`
    );
  }
  return rawJson(body);
}

type Renderer = (payload: Record<string, unknown>) => string;

const RENDERERS: Record<string, Renderer> = {
  created: (p) => `<div class="note">session opened on <b>${esc(p.database_id)}</b></div>`,

  routed: (p) =>
    `<div class="chips">` +
    chip("intent", p.kind) +
    chip("task", p.sub_intent) +
    chip("confidence", num(p.confidence, 2)) +
    `</div>`,

  awaiting: (p) =>
    `<div class="callout">${esc(p.question ?? "the agent needs more detail")}</div>`,

  resumed: (p) => `<div class="note">continuing with “${esc(p.reply ?? "")}”</div>`,

  feedback: (p) =>
    `<div class="note">feedback understood as <b>${esc(
      p.action ?? "context",
    )}</b></div>`,

  overview: (p) => {
    const anomalies = Array.isArray(p.anomalies) ? p.anomalies : [];
    const list = anomalies
      .map(
        (a) =>
          `<li><b>${esc((a as Record<string, unknown>).column)}</b> ${esc(
            (a as Record<string, unknown>).kind,
          )}: ${esc((a as Record<string, unknown>).evidence)}</li>`,
      )
      .join("");
    return (
      `<div class="card"><div class="card-title">table ${esc(p.table)}</div>` +
      `<p>${esc(p.description ?? "")}</p>` +
      (list ? `<ul class="anomalies">${list}</ul>` : "") +
      `</div>`
    );
  },

  recommendation: (p) => {
    const tables = Array.isArray(p.tables) ? p.tables : [];
    const rows = tables
      .map(
        (t) =>
          `<li><b>${esc((t as Record<string, unknown>).table)}</b> — ${esc(
            (t as Record<string, unknown>).reason,
          )}</li>`,
      )
      .join("");
    return (
      `<div class="card"><div class="card-title">recommended tables</div>` +
      `<p>${esc(p.objective ?? "")}</p><ul>${rows}</ul></div>`
    );
  },

  result: (p) =>
    `<div class="card"><div class="card-title">query result</div>` +
    (typeof p.sql === "string" ? sqlBlock(p.sql) : "") +
    (Array.isArray(p.columns) && Array.isArray(p.rows)
      ? dataTable(p.columns as unknown[], p.rows as unknown[][])
      : rawJson(p)) +
    `</div>`,

  causal_query: (p) =>
    `<div class="chips">` +
    chip("treatment", p.treatment) +
    chip("outcome", p.outcome) +
    `</div>` +
    (typeof p.graph_text === "string"
      ? `<pre class="graph">${esc(p.graph_text)}</pre>`
      : ""),

  prepare_data: (p) =>
    `<div class="note">prepared ${esc(p.rows)} rows` +
    (Number(p.dropped) > 0 ? `, dropped ${esc(p.dropped)}` : "") +
    `</div>`,

  select_config: (p) =>
    `<div class="chips">` +
    chip("estimator", p.estimation) +
    chip("refuter", p.refutation ?? "none") +
    `</div>`,

  identify: (p) => {
    const adjustment = Array.isArray(p.adjustment) ? p.adjustment : [];
    return (
      `<div class="note">backdoor adjustment set {${esc(
        adjustment.join(", "),
      )}}</div>` +
      (typeof p.expression === "string"
        ? `<div class="note dim">${esc(p.expression)}</div>`
        : "")
    );
  },

  estimate: (p) => {
    const ci = Array.isArray(p.ci) ? (p.ci as unknown[]) : [];
    return (
      `<div class="chips">` +
      chip("ate", num(p.ate)) +
      chip("95% CI", `[${num(ci[0])}, ${num(ci[1])}]`) +
      chip("method", p.method) +
      chip("n", p.n) +
      `</div>`
    );
  },

  refute: (p) =>
    `<div class="note">refuter ${esc(p.technique)}: <b>${esc(
      p.verdict,
    )}</b> (shifted estimate ${num(p.refuted_estimate)})</div>`,

  interpret: (p) =>
    `<div class="note">interpretation drafted (${esc(p.sentences)} sentences)</div>`,

  artifact: (p) =>
    `<div class="artifact" data-artifact="${esc(p.artifact_id)}">` +
    renderArtifact(String(p.kind), p.body) +
    `</div>`,

  error: (p) =>
    `<div class="callout error"><b>${esc(p.kind)}</b>: ${esc(p.message)}</div>`,

  done: (p) =>
    `<div class="done ${p.status === "complete" || p.status === "ok" || p.status === "success" ? "ok" : "warn"}">` +
    `finished: ${esc(p.status)}` +
    (typeof p.interpretation === "string" && p.interpretation
      ? `<p class="interpretation">${esc(p.interpretation)}</p>`
      : "") +
    `</div>`,
};

/** Render one pipeline event. sql_* stages share a generic treatment; any
 * stage without a renderer falls back to raw structured text. */
export function renderEvent(event: PipelineEvent): string {
  const renderer = RENDERERS[event.stage];
  if (renderer) return renderer(event.payload);
  if (event.stage.startsWith("sql_")) {
    const p = event.payload;
    const parts: string[] = [];
    if (typeof p.sql === "string") parts.push(sqlBlock(p.sql));
    const scalars = Object.entries(p)
      .filter(([k, v]) => k !== "sql" && (typeof v !== "object" || v === null))
      .map(([k, v]) => chip(k, v ?? "–"))
      .join("");
    if (scalars) parts.push(`<div class="chips">${scalars}</div>`);
    if (parts.length === 0) parts.push(rawJson(p));
    return parts.join("");
  }
  return rawJson(event.payload);
}

/** Human heading for a rendered event bubble. */
export function stageTitle(event: PipelineEvent): string {
  if (event.stage === "artifact") {
    return `artifact ${event.payload.artifact_id ?? ""} (${event.payload.kind ?? "?"})`;
  }
  return event.stage.replace(/_/g, " ");
}
