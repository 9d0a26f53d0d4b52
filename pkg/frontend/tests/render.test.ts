import { describe, expect, it } from "vitest";

import { erdToSvg, parseDot } from "../src/erd.js";
import {
  dataTable,
  highlightSql,
  renderArtifact,
  renderEvent,
  reportCard,
} from "../src/render.js";
import type { PipelineEvent } from "../src/types.js";
import { ConversationView } from "../src/view.js";

function event(
  sequence: number,
  stage: string,
  payload: Record<string, unknown> = {},
  terminal = false,
): PipelineEvent {
  return { session_id: "s-000001", sequence, stage, payload, terminal };
}

const REPORT_BODY = {
  question: "does t move y?",
  treatment: "t",
  outcome: "y",
  status: "complete",
  estimand: { adjustment_set: ["z"], expression: "E[y | do(t)]" },
  estimate: {
    ate: 2.076,
    ci_low: 1.947,
    ci_high: 2.206,
    n_used: 300,
    method: "linear_regression",
  },
  refutation: {
    technique: "placebo_treatment",
    verdict: "passed",
    detail: "covers zero",
  },
  interpretation: "One. Two. Three. Four.",
  error: null,
};

describe("event renderers", () => {
  const KNOWN: PipelineEvent[] = [
    event(1, "created", { database_id: "shop" }),
    event(2, "routed", { kind: "causal", sub_intent: "effect_estimation", confidence: 0.9 }),
    event(3, "awaiting", { question: "which table?" }),
    event(4, "resumed", { reply: "orders" }),
    event(5, "feedback", { action: "use" }),
    event(6, "overview", {
      table: "orders",
      description: "order headers",
      anomalies: [{ column: "amount", kind: "outlier", evidence: "4 beyond 4σ" }],
    }),
    event(7, "recommendation", {
      objective: "find drivers",
      tables: [{ table: "orders", reason: "has amounts" }],
    }),
    event(8, "result", { columns: ["n"], rows: [[3]], sql: "SELECT 3" }),
    event(9, "causal_query", { treatment: "t", outcome: "y", graph_text: "t -> y" }),
    event(10, "prepare_data", { rows: 300, dropped: 0 }),
    event(11, "select_config", { estimation: "linear_regression", refutation: "placebo_treatment" }),
    event(12, "identify", { adjustment: ["z"], expression: "E[y|do(t)]" }),
    event(13, "estimate", { ate: 2.1, ci: [1.9, 2.3], n: 300, method: "linear_regression" }),
    event(14, "refute", { technique: "placebo_treatment", verdict: "passed", refuted_estimate: 0.02 }),
    event(15, "interpret", { sentences: 4, notes: [] }),
    event(16, "artifact", { artifact_id: "a-003", kind: "report", body: REPORT_BODY }),
    event(17, "error", { kind: "EmptyQuery", message: "query text is empty" }),
    event(18, "done", { status: "complete" }, true),
  ];

  it("renders every known stage without falling back to raw JSON", () => {
    for (const e of KNOWN) {
      const html = renderEvent(e);
      expect(html.length, e.stage).toBeGreaterThan(0);
      expect(html, e.stage).not.toContain('class="raw"');
    }
  });

  it("renders sql_* stages with highlighted statements", () => {
    const html = renderEvent(
      event(3, "sql_generate", { sql: "SELECT COUNT(*) FROM users", attempt: 1 }),
    );
    expect(html).toContain('class="sql"');
    expect(html).toContain('<span class="kw">SELECT</span>');
    expect(html).toContain("attempt");
  });

  it("renders unknown stages as raw structured text instead of dropping them", () => {
    const html = renderEvent(event(4, "telemetry_v2", { weird: { deep: [1, 2] } }));
    expect(html).toContain('class="raw"');
    expect(html).toContain("weird");
    expect(html).toContain("deep");
  });

  it("escapes user-controlled text", () => {
    const html = renderEvent(
      event(5, "awaiting", { question: "<script>alert(1)</script>?" }),
    );
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });
});

describe("report card", () => {
  it("shows ATE, CI, method, refutation verdict, and interpretation", () => {
    const html = reportCard(REPORT_BODY);
    expect(html).toContain("2.076");
    expect(html).toContain("[1.947, 2.206]");
    expect(html).toContain("linear_regression");
    expect(html).toContain("passed");
    expect(html).toContain("One. Two. Three. Four.");
    expect(html).toContain("adjusting for");
  });

  it("renders failures as an error card", () => {
    const html = reportCard({ status: "error", error: "no rows after deletion" });
    expect(html).toContain("analysis failed");
    expect(html).toContain("no rows after deletion");
  });

  it("says so when no refutation ran", () => {
    const html = reportCard({ ...REPORT_BODY, refutation: null });
    expect(html).toContain("no refutation run");
  });
});

describe("erd rendering", () => {
  const DOT = [
    "digraph erd {",
    '  "orders" [label="orders: order_id, user_id"];',
    '  "users" [label="users: user_id"];',
    '  "orders" -> "users" [label="user_id→user_id"];',
    "}",
  ].join("\n");

  it("parses the service's dot dialect", () => {
    const graph = parseDot(DOT);
    expect(graph?.nodes.map((n) => n.name)).toEqual(["orders", "users"]);
    expect(graph?.edges).toHaveLength(1);
  });

  it("lays out an svg with both tables and the fk edge label", () => {
    const svg = erdToSvg(DOT);
    expect(svg).toContain("<svg");
    expect(svg).toContain("orders: order_id, user_id");
    expect(svg).toContain("user_id→user_id");
    expect(svg).toContain("<polyline");
  });

  it("returns null for non-dot text so callers can fall back", () => {
    expect(erdToSvg("not a graph at all")).toBeNull();
    expect(renderArtifact("erd", "not a graph at all")).toContain('class="raw"');
  });

  it("renders dot artifacts as graphs", () => {
    expect(renderArtifact("erd", DOT)).toContain("<svg");
  });
});

describe("tables and sql", () => {
  it("caps preview rows and says how many were hidden", () => {
    const rows = Array.from({ length: 30 }, (_, i) => [i]);
    const html = dataTable(["k"], rows, 20);
    expect((html.match(/<tr>/g) ?? []).length).toBe(21); // header + 20
    expect(html).toContain("showing 20 of 30 rows");
  });

  it("highlights keywords case-insensitively", () => {
    const html = highlightSql("select k from t where k is null");
    expect(html).toContain('<span class="kw">select</span>');
    expect(html).toContain('<span class="kw">where</span>');
  });
});

describe("conversation view ordering", () => {
  it("applies events strictly in sequence order, buffering early arrivals", () => {
    const view = new ConversationView();
    expect(view.applyEvent(event(2, "routed"))).toBe(0); // early: buffered
    expect(view.messages).toHaveLength(0);
    expect(view.applyEvent(event(1, "created"))).toBe(2); // unblocks both
    expect(view.messages.map((m) => m.sequence)).toEqual([1, 2]);
  });

  it("drops duplicates", () => {
    const view = new ConversationView();
    view.applyEvent(event(1, "created"));
    expect(view.applyEvent(event(1, "created"))).toBe(0);
    expect(view.messages).toHaveLength(1);
  });

  it("mirrors the server pending state", () => {
    const view = new ConversationView();
    view.applyEvent(event(1, "created"));
    view.applyEvent(event(2, "awaiting", { question: "which table?" }));
    expect(view.awaitingReply).toBe(true);
    expect(view.pendingQuestion).toBe("which table?");
    view.applyEvent(event(3, "resumed", { reply: "orders" }));
    expect(view.awaitingReply).toBe(false);
  });

  it("clears pending on terminal events too", () => {
    const view = new ConversationView();
    view.applyEvent(event(1, "awaiting", { question: "?" }));
    view.applyEvent(event(2, "done", { status: "error" }, true));
    expect(view.awaitingReply).toBe(false);
  });

  it("collects artifacts and exposes the latest report", () => {
    const view = new ConversationView();
    view.applyEvent(event(1, "artifact", { artifact_id: "a-001", kind: "trace", body: {} }));
    view.applyEvent(
      event(2, "artifact", { artifact_id: "a-002", kind: "report", body: REPORT_BODY }),
    );
    view.applyEvent(
      event(3, "artifact", {
        artifact_id: "a-003",
        kind: "report",
        body: { ...REPORT_BODY, interpretation: "newer" },
      }),
    );
    expect(view.artifacts.size).toBe(3);
    const latest = view.latestArtifact("report");
    expect(latest?.artifactId).toBe("a-003");
  });
});
