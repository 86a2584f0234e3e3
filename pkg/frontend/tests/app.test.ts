// @vitest-environment jsdom
import { readFileSync } from "node:fs";
import { join } from "node:path";
import { afterEach, describe, expect, it, vi } from "vitest";

import { initApp } from "../src/app.js";

// import.meta.url is an http: URL under jsdom, so locate the page from the
// package root (vitest runs with cwd at frontend/).
const pageHtml = readFileSync(join(process.cwd(), "index.html"), "utf8");

const GOOD_RESULT = {
  probability: 0.873,
  label: "positive",
  votes: [
    { kind: "boosted_trees", vote: 1, score: 0.91 },
    { kind: "logistic_regression", vote: 1, score: 0.84 },
    { kind: "random_forest", vote: 1, score: 0.88 },
    { kind: "decision_tree", vote: 1, score: 1 },
    { kind: "neural_network", vote: 0, score: 0.47 },
    { kind: "linear_svm", vote: 1, score: 0.79 },
  ],
  model_version: "1",
};

function mount(): void {
  const start = pageHtml.indexOf("<body>") + "<body>".length;
  const end = pageHtml.indexOf("</body>");
  document.body.innerHTML = pageHtml.slice(start, end);
  initApp(document);
}

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (found === null) {
    throw new Error(`missing #${id}`);
  }
  return found as T;
}

function fill(field: string, value: string): void {
  const input = el<HTMLInputElement>(field);
  input.value = value;
  input.dispatchEvent(new Event("input", { bubbles: true }));
  input.dispatchEvent(new Event("change", { bubbles: true }));
}

function fillValidForm(): void {
  fill("fit_result", "120");
  fill("bmi", "31");
  fill("age", "66");
  fill("diabetes", "1");
  fill("smoking", "0");
}

function submitForm(): void {
  el<HTMLFormElement>("risk-form").dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
}

function jsonResponse(status: number, doc: unknown): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: () => Promise.resolve(doc),
  } as unknown as Response;
}

afterEach(() => {
  vi.unstubAllGlobals();
  document.body.innerHTML = "";
});

describe("form validation", () => {
  it("keeps submit disabled until every field is valid", () => {
    mount();
    const submit = el<HTMLButtonElement>("submit");
    expect(submit.disabled).toBe(true);
    fill("fit_result", "120");
    fill("bmi", "31");
    fill("age", "66");
    fill("diabetes", "1");
    expect(submit.disabled).toBe(true);
    fill("smoking", "0");
    expect(submit.disabled).toBe(false);
  });

  it("shows an inline range error and clears it once fixed", () => {
    mount();
    fillValidForm();
    fill("bmi", "9");
    const error = el("bmi-error");
    expect(error.hidden).toBe(false);
    expect(error.textContent).toBe("bmi must be in [10, 80], got 9");
    expect(el<HTMLButtonElement>("submit").disabled).toBe(true);
    fill("bmi", "31");
    expect(error.hidden).toBe(true);
    expect(el<HTMLButtonElement>("submit").disabled).toBe(false);
  });

  it("never calls the service while a field is invalid", () => {
    const mock = vi.fn();
    vi.stubGlobal("fetch", mock);
    mount();
    fillValidForm();
    fill("age", "17");
    submitForm();
    expect(mock).not.toHaveBeenCalled();
  });
});

describe("prediction rendering", () => {
  it("renders probability 0.873 with a positive badge", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse(200, GOOD_RESULT));
    vi.stubGlobal("fetch", mock);
    mount();
    fillValidForm();
    submitForm();
    await vi.waitFor(() => expect(el("result").hidden).toBe(false));

    expect(el("probability").textContent).toBe("0.873");
    const badge = el("label-badge");
    expect(badge.textContent).toBe("positive");
    expect(badge.classList.contains("positive")).toBe(true);

    const rows = el("votes-body").querySelectorAll("tr");
    expect(rows).toHaveLength(6);
    const firstCells = [...rows[0]!.querySelectorAll("td")].map((c) => c.textContent);
    expect(firstCells).toEqual(["boosted_trees", "1", "0.910"]);

    const body = JSON.parse(mock.mock.calls[0][1].body);
    expect(body).toEqual({ fit_result: 120, bmi: 31, age: 66, diabetes: 1, smoking: 0 });
  });

  it("renders a negative label with its own badge style", async () => {
    const doc = { ...GOOD_RESULT, probability: 0.25, label: "negative" };
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse(200, doc)));
    mount();
    fillValidForm();
    submitForm();
    await vi.waitFor(() => expect(el("result").hidden).toBe(false));
    expect(el("probability").textContent).toBe("0.250");
    const badge = el("label-badge");
    expect(badge.textContent).toBe("negative");
    expect(badge.classList.contains("negative")).toBe(true);
  });

  it("rounds displayed values half-to-even", async () => {
    const doc = {
      ...GOOD_RESULT,
      probability: 0.8725,
      votes: [{ kind: "boosted_trees", vote: 1, score: 0.8735 }],
    };
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse(200, doc)));
    mount();
    fillValidForm();
    submitForm();
    await vi.waitFor(() => expect(el("result").hidden).toBe(false));
    expect(el("probability").textContent).toBe("0.872");
    const cells = [...el("votes-body").querySelectorAll("td")].map((c) => c.textContent);
    expect(cells).toEqual(["boosted_trees", "1", "0.874"]);
  });

  it("sends the request to the configured service URL", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse(200, GOOD_RESULT));
    vi.stubGlobal("fetch", mock);
    mount();
    el<HTMLInputElement>("service-url").value = "http://10.1.2.3:7000/";
    fillValidForm();
    submitForm();
    await vi.waitFor(() => expect(mock).toHaveBeenCalled());
    expect(mock.mock.calls[0][0]).toBe("http://10.1.2.3:7000/predict");
  });

  it("falls back to the default URL when the setting is blank", async () => {
    const mock = vi.fn().mockResolvedValue(jsonResponse(200, GOOD_RESULT));
    vi.stubGlobal("fetch", mock);
    mount();
    el<HTMLInputElement>("service-url").value = "   ";
    fillValidForm();
    submitForm();
    await vi.waitFor(() => expect(mock).toHaveBeenCalled());
    expect(mock.mock.calls[0][0]).toBe("http://127.0.0.1:8000/predict");
  });
});

describe("request lifecycle", () => {
  it("keeps at most one request in flight", async () => {
    let release!: (r: Response) => void;
    const gate = new Promise<Response>((resolve) => {
      release = resolve;
    });
    const mock = vi.fn().mockReturnValue(gate);
    vi.stubGlobal("fetch", mock);
    mount();
    fillValidForm();
    submitForm();
    expect(el<HTMLButtonElement>("submit").disabled).toBe(true);
    submitForm();
    submitForm();
    expect(mock).toHaveBeenCalledTimes(1);
    release(jsonResponse(200, GOOD_RESULT));
    await vi.waitFor(() => expect(el("result").hidden).toBe(false));
    expect(el<HTMLButtonElement>("submit").disabled).toBe(false);
  });
});

describe("failure rendering", () => {
  it("shows a service 400 as an inline error on the named field", async () => {
    const errorDoc = {
      error: { category: "range", message: "smoking must be 0 or 1, got 3", field: "smoking" },
    };
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse(400, errorDoc)));
    mount();
    fillValidForm();
    submitForm();
    await vi.waitFor(() => expect(el("smoking-error").hidden).toBe(false));
    expect(el("smoking-error").textContent).toBe("smoking must be 0 or 1, got 3");
    expect(el("banner").hidden).toBe(true);
    expect(el("result").hidden).toBe(true);
  });

  it("shows a retryable banner on network failure and preserves the form", async () => {
    const mock = vi.fn().mockRejectedValue(new TypeError("fetch failed"));
    vi.stubGlobal("fetch", mock);
    mount();
    fillValidForm();
    submitForm();
    await vi.waitFor(() => expect(el("banner").hidden).toBe(false));
    expect(el("banner-message").textContent).toBe("cannot reach the service: fetch failed");
    expect(el<HTMLButtonElement>("retry").hidden).toBe(false);
    expect(el<HTMLInputElement>("fit_result").value).toBe("120");
    expect(el<HTMLInputElement>("bmi").value).toBe("31");

    mock.mockResolvedValue(jsonResponse(200, GOOD_RESULT));
    el<HTMLButtonElement>("retry").click();
    await vi.waitFor(() => expect(el("result").hidden).toBe(false));
    expect(mock).toHaveBeenCalledTimes(2);
    expect(mock.mock.calls[1][1].body).toBe(mock.mock.calls[0][1].body);
    expect(el("banner").hidden).toBe(true);
    expect(el("probability").textContent).toBe("0.873");
  });

  it("shows a generic banner for a malformed response with no partial render", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(jsonResponse(200, { probability: 0.9 })),
    );
    mount();
    fillValidForm();
    submitForm();
    await vi.waitFor(() => expect(el("banner").hidden).toBe(false));
    expect(el("banner-message").textContent).toBe(
      "service response did not match the expected shape",
    );
    expect(el<HTMLButtonElement>("retry").hidden).toBe(true);
    expect(el("result").hidden).toBe(true);
    expect(el("probability").textContent).toBe("");
    expect(el("votes-body").children).toHaveLength(0);
  });

  it("shows a fieldless service failure in the banner", async () => {
    const errorDoc = { error: { category: "unavailable", message: "model not loaded" } };
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse(503, errorDoc)));
    mount();
    fillValidForm();
    submitForm();
    await vi.waitFor(() => expect(el("banner").hidden).toBe(false));
    expect(el("banner-message").textContent).toBe("model not loaded");
    expect(el<HTMLButtonElement>("retry").hidden).toBe(true);
  });
});

describe("page content", () => {
  it("keeps the research disclaimer visible", () => {
    mount();
    const disclaimers = document.querySelectorAll(".disclaimer");
    expect(disclaimers.length).toBeGreaterThan(0);
    expect(disclaimers[0]!.textContent).toContain("Research demonstration only");
  });
});
