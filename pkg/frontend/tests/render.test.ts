import { describe, expect, it } from "vitest";

import { explanationView, featureCards, contributionItems } from "../src/model.js";
import {
  renderContributions,
  renderExplanationPanel,
  renderFeatureCards,
  renderRetryBanner,
  renderUserHeader,
  renderUserView,
  escapeHtml,
} from "../src/render.js";
import { explanationFixture, userFixture } from "./helpers.js";

describe("feature cards", () => {
  it("renders quartile colors exactly as the service reports them", () => {
    const html = renderFeatureCards(featureCards(explanationFixture()));
    expect(html).toContain('class="feature-card q-red"');
    expect(html).toContain('class="feature-card q-yellow"');
    expect(html).toContain('class="feature-card q-green"');
  });

  it("renders the neutral class for uncolored features", () => {
    const explanation = explanationFixture({
      top_features: [{ feature: "flesch", value: 10, color: null }],
    });
    const html = renderFeatureCards(featureCards(explanation));
    expect(html).toContain('class="feature-card q-none"');
    expect(html).not.toContain("q-red");
  });
});

describe("contributions list", () => {
  it("shows evaluate controls only for unevaluated items", () => {
    const html = renderContributions(contributionItems(userFixture()));
    // ev1 is unevaluated: both verdict buttons present
    expect(html).toContain('data-action="validate" data-event="ev1"');
    expect(html).toContain('data-action="reject" data-event="ev1"');
    // ev2 was evaluated: no buttons, badge instead
    expect(html).not.toContain('data-event="ev2">validate');
    expect(html).not.toContain('data-action="validate" data-event="ev2"');
    expect(html).toContain("evaluated (label 0)");
  });

  it("controls disappear after feedback is applied", () => {
    const user = userFixture();
    const before = renderContributions(contributionItems(user));
    expect(before).toContain('data-action="validate" data-event="ev1"');
    user.contributions[0].evaluated = true;
    user.contributions[0].feedback_label = 1;
    const after = renderContributions(contributionItems(user));
    expect(after).not.toContain('data-action="validate" data-event="ev1"');
    expect(after).toContain("evaluated (label 1)");
  });
});

describe("explanation panel", () => {
  it("tree selector change updates path and text panel", () => {
    const explanation = explanationFixture();
    const first = renderExplanationPanel(explanationView(explanation, 0));
    const second = renderExplanationPanel(explanationView(explanation, 2));
    expect(first).not.toBe(second);
    expect(first).toContain("n_chars");
    expect(second).toContain("user_spam_tendency");
    expect(second).not.toContain("n_chars &gt; 120.5");
    // the natural-language panel is present in both renders
    expect(first).toContain("classifier labeled this revision");
    expect(second).toContain("classifier labeled this revision");
    // headline reflects the selected tree
    expect(first).toContain("Tree 0 of 2");
    expect(second).toContain("Tree 2 of 2");
  });

  it("renders only majority-agreeing trees in the selector", () => {
    const explanation = explanationFixture();
    const html = renderExplanationPanel(explanationView(explanation, 0));
    expect(html).toContain('<option value="0" selected>');
    expect(html).toContain('<option value="2">');
    expect(html).not.toContain('<option value="1"'); // tree 1 disagreed, filtered out
  });

  it("renders confidence from the service", () => {
    const html = renderExplanationPanel(explanationView(explanationFixture(), 0));
    expect(html).toContain("confidence 66.67%");
  });
});

describe("page composition", () => {
  it("renders header, cards, contributions and panel together", () => {
    const user = userFixture();
    const explanation = explanationFixture();
    const html = renderUserView(user, featureCards(explanation), explanationView(explanation, 0));
    expect(html).toContain("user001");
    expect(html).toContain("shocking secret exposed");
    expect(html).toContain("feature-cards");
    expect(html).toContain("explanation-panel");
  });

  it("user header shows the most recent contribution", () => {
    const html = renderUserHeader(userFixture());
    expect(html).toContain("last contribution");
    expect(html).toContain("shocking secret exposed");
  });

  it("retry banner escapes the message", () => {
    const html = renderRetryBanner('<script>alert("x")</script>');
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("escapeHtml covers the html-active characters", () => {
    expect(escapeHtml('<a href="x">&</a>')).toBe("&lt;a href=&quot;x&quot;&gt;&amp;&lt;/a&gt;");
  });
});
