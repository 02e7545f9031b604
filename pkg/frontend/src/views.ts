/** DOM rendering for the queue, candidate detail, and storms list.
 * Plain DOM, no framework; every flag, band, and vote shown comes straight
 * from API payloads. */

import {
  bandPath,
  flaggedIntervals,
  intervalRect,
  linearScale,
  linePath,
  nearestIndex,
  valueExtent,
} from './chart';
import type { ReviewSession } from './state';
import type {
  ArticleMeta,
  CandidateDetail,
  CandidateRow,
  SignalKind,
} from './types';
import { SIGNAL_COLORS, SIGNAL_KINDS } from './types';

export const QUEUE_PAGE_SIZE = 25;

type Child = Node | string | null | undefined;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (key === 'class') node.className = value;
    else node.setAttribute(key, value);
  }
  for (const child of children) {
    if (child === null || child === undefined) continue;
    node.append(child instanceof Node ? child : document.createTextNode(child));
  }
  return node;
}

function svgEl(tag: string, attrs: Record<string, string> = {}): SVGElement {
  const node = document.createElementNS('http://www.w3.org/2000/svg', tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

export interface QueueHandlers {
  onOpen: (candidateId: string) => void;
  onTriggerIteration: () => void;
}

export function renderQueue(
  container: HTMLElement,
  session: ReviewSession,
  handlers: QueueHandlers,
  page = 0,
): void {
  container.replaceChildren();
  container.append(
    el(
      'div',
      { class: 'tally', 'data-testid': 'tally' },
      `session: ${session.tally.validated} validated, ${session.tally.rejected} rejected`,
    ),
  );
  if (session.lastError) {
    container.append(
      el('div', { class: 'banner error', 'data-testid': 'error-banner' },
        `request failed: ${session.lastError} `,
        el('button', { 'data-testid': 'retry' }, 'retry'),
      ),
    );
  }

  if (session.rows.length === 0) {
    const done = el(
      'div',
      { class: 'empty-queue', 'data-testid': 'iteration-complete' },
      el('h2', {}, 'iteration complete'),
      el('p', {}, 'every candidate in this round has been decided.'),
    );
    const trigger = el('button', { 'data-testid': 'trigger-iteration' }, 'start next iteration');
    trigger.addEventListener('click', handlers.onTriggerIteration);
    done.append(trigger);
    container.append(done);
    return;
  }

  const pages = Math.max(1, Math.ceil(session.rows.length / QUEUE_PAGE_SIZE));
  const current = Math.min(page, pages - 1);
  const visible = session.rows.slice(
    current * QUEUE_PAGE_SIZE,
    (current + 1) * QUEUE_PAGE_SIZE,
  );

  container.append(
    el(
      'div',
      { class: 'queue-meta', 'data-testid': 'queue-total' },
      `${session.total} pending candidate(s)` + (pages > 1 ? ` — page ${current + 1}/${pages}` : ''),
    ),
  );

  const tbody = el('tbody');
  for (const row of visible) {
    const tr = el(
      'tr',
      { class: 'queue-row', 'data-testid': 'queue-row', 'data-candidate-id': row.id },
      el('td', {}, `${row.start} .. ${row.end}`),
      el('td', {}, `${durationDays(row)}d`),
      el('td', {}, row.id),
    );
    if (session.conflicts.has(row.id)) tr.classList.add('conflict');
    tr.addEventListener('click', () => handlers.onOpen(row.id));
    tbody.append(tr);
  }
  container.append(
    el(
      'table',
      { class: 'queue' },
      el(
        'thead',
        {},
        el('tr', {}, el('th', {}, 'window'), el('th', {}, 'duration'), el('th', {}, 'candidate')),
      ),
      tbody,
    ),
  );

  if (pages > 1) {
    const nav = el('div', { class: 'pager' });
    for (let p = 0; p < pages; p++) {
      const btn = el('button', { 'data-testid': `page-${p}` }, String(p + 1));
      if (p === current) btn.setAttribute('disabled', 'disabled');
      btn.addEventListener('click', () => renderQueue(container, session, handlers, p));
      nav.append(btn);
    }
    container.append(nav);
  }
}

function durationDays(row: CandidateRow): number {
  const ms = Date.parse(row.end) - Date.parse(row.start);
  return Math.round(ms / 86_400_000) + 1;
}

export interface CandidateHandlers {
  onDecided: () => void;
  onBack: () => void;
}

const CHART = { width: 760, height: 150, padLeft: 46, padRight: 8, padTop: 8, padBottom: 18 };

/** One SVG track per signal: observed line, forecast, band, anomaly shading. */
export function renderSignalChart(
  detail: CandidateDetail,
  kind: SignalKind,
  showBand: boolean,
): SVGElement {
  const slice = detail.series[kind];
  const n = detail.dates.length;
  const svg = svgEl('svg', {
    viewBox: `0 0 ${CHART.width} ${CHART.height}`,
    width: String(CHART.width),
    height: String(CHART.height),
    'data-testid': `chart-${kind}`,
    role: 'img',
  });

  const sx = linearScale(0, n - 1, CHART.padLeft, CHART.width - CHART.padRight);
  const allMissing = slice.observed.every((v) => v === null);
  if (allMissing) {
    svg.append(
      Object.assign(svgEl('text', {
        x: String(CHART.width / 2),
        y: String(CHART.height / 2),
        'text-anchor': 'middle',
        class: 'no-data-badge',
        'data-testid': `no-data-${kind}`,
      }), { textContent: `${kind}: no data` }),
    );
    return svg;
  }

  const [lo, hi] = valueExtent([slice.observed, slice.lower, slice.upper, slice.yhat]);
  const sy = linearScale(lo, hi, CHART.height - CHART.padBottom, CHART.padTop);

  // candidate window shading
  const startIdx = detail.dates.indexOf(detail.candidate.start);
  const endIdx = detail.dates.indexOf(detail.candidate.end);
  if (startIdx >= 0 && endIdx >= 0) {
    const rect = intervalRect(
      { fromIndex: startIdx, toIndex: endIdx, fromDate: '', toDate: '' },
      sx,
    );
    svg.append(
      svgEl('rect', {
        x: rect.x.toFixed(2),
        y: String(CHART.padTop),
        width: rect.width.toFixed(2),
        height: String(CHART.height - CHART.padTop - CHART.padBottom),
        class: 'window-shade',
        'data-testid': `window-shade-${kind}`,
        fill: '#f59e0b22',
      }),
    );
  }

  // per-day anomaly shading, straight from the API's flagged_days
  for (const interval of flaggedIntervals(detail.dates, slice.flagged_days)) {
    const rect = intervalRect(interval, sx);
    svg.append(
      svgEl('rect', {
        x: rect.x.toFixed(2),
        y: String(CHART.padTop),
        width: rect.width.toFixed(2),
        height: String(CHART.height - CHART.padTop - CHART.padBottom),
        class: 'anomaly-shade',
        'data-testid': `anomaly-shade-${kind}`,
        'data-from': interval.fromDate,
        'data-to': interval.toDate,
        fill: `${SIGNAL_COLORS[kind]}2e`,
      }),
    );
  }

  if (showBand) {
    svg.append(
      svgEl('path', {
        d: bandPath(slice.lower, slice.upper, sx, sy),
        class: 'band',
        'data-testid': `band-${kind}`,
        fill: `${SIGNAL_COLORS[kind]}1a`,
        stroke: 'none',
      }),
    );
  }
  svg.append(
    svgEl('path', {
      d: linePath(slice.yhat, sx, sy),
      class: 'yhat',
      stroke: SIGNAL_COLORS[kind],
      'stroke-dasharray': '4 3',
      fill: 'none',
      opacity: '0.6',
    }),
  );
  svg.append(
    svgEl('path', {
      d: linePath(slice.observed, sx, sy),
      class: 'observed',
      'data-testid': `observed-${kind}`,
      stroke: SIGNAL_COLORS[kind],
      'stroke-width': '1.6',
      fill: 'none',
    }),
  );

  // hover readout: day, observed, forecast, bounds, vote set
  const readout = svgEl('text', {
    x: String(CHART.padLeft),
    y: String(CHART.height - 4),
    class: 'readout',
    'data-testid': `readout-${kind}`,
  });
  svg.append(readout);
  svg.addEventListener('mousemove', (event) => {
    const bounds = (svg as unknown as SVGGraphicsElement).getBoundingClientRect();
    const px = ((event as MouseEvent).clientX - bounds.left) * (CHART.width / Math.max(bounds.width, 1));
    const i = nearestIndex(px, n, sx);
    const date = detail.dates[i];
    const votes = detail.candidate.votes_by_day[date] ?? [];
    const fmt = (v: number | null) => (v === null ? '—' : v.toFixed(3));
    readout.textContent =
      `${date}  y=${fmt(slice.observed[i])}  fit=${fmt(slice.yhat[i])}  ` +
      `band=[${fmt(slice.lower[i])}, ${fmt(slice.upper[i])}]  votes={${votes.join(',')}}`;
  });
  return svg;
}

export function renderCandidate(
  container: HTMLElement,
  detail: CandidateDetail,
  articles: ArticleMeta[],
  session: ReviewSession,
  handlers: CandidateHandlers,
): void {
  container.replaceChildren();
  const summary = detail.candidate;

  const back = el('button', { 'data-testid': 'back' }, '← queue');
  back.addEventListener('click', handlers.onBack);
  const votes = SIGNAL_KINDS.map((k) => `${k}:${summary.votes[k] ?? 0}`).join('  ');
  container.append(
    el(
      'header',
      { class: 'candidate-header' },
      back,
      el('h2', {}, `${summary.start} .. ${summary.end} (${summary.duration_days}d)`),
      el('div', { class: 'votes', 'data-testid': 'vote-counts' }, votes),
    ),
  );

  const conflictRow = session.conflicts.get(summary.id);
  if (conflictRow) {
    container.append(
      el(
        'div',
        { class: 'banner conflict', 'data-testid': 'conflict-banner' },
        `decided elsewhere: this candidate is already ${conflictRow.status}` +
          (conflictRow.label ? ` (“${conflictRow.label}”)` : ''),
      ),
    );
  }

  // optional outbound search for cross-referencing the window against
  // historical events; configured as a URL template with a {date} slot
  const searchTemplate = (window as { STORMWATCH_SEARCH_URL?: string }).STORMWATCH_SEARCH_URL;
  if (searchTemplate) {
    const link = el('a', {
      href: searchTemplate.replace('{date}', summary.start),
      target: '_blank',
      rel: 'noopener',
      'data-testid': 'external-search',
    }, `look up events around ${summary.start} ↗`);
    container.append(el('div', { class: 'external-search' }, link));
  }

  const bandToggle = el('input', { type: 'checkbox', id: 'band-toggle', checked: 'checked' });
  const charts = el('div', { class: 'charts', 'data-testid': 'charts' });
  const legend = el(
    'div',
    { class: 'legend', 'data-testid': 'legend' },
    ...SIGNAL_KINDS.map((k) =>
      el('span', { class: 'legend-entry', 'data-kind': k }, `■ ${k}`),
    ),
  );
  legend.querySelectorAll('span').forEach((span, i) => {
    (span as HTMLElement).style.color = SIGNAL_COLORS[SIGNAL_KINDS[i]];
  });

  const drawCharts = () => {
    charts.replaceChildren();
    for (const kind of SIGNAL_KINDS) {
      charts.append(el('div', { class: 'chart-title' }, kind));
      charts.append(renderSignalChart(detail, kind, bandToggle.checked) as unknown as Node);
    }
  };
  bandToggle.addEventListener('change', drawCharts);
  container.append(
    el('div', { class: 'chart-controls' }, bandToggle, el('label', { for: 'band-toggle' }, ' uncertainty bands')),
    legend,
    charts,
  );
  drawCharts();

  // articles grouped by day
  const byDay = new Map<string, ArticleMeta[]>();
  for (const article of articles) {
    const list = byDay.get(article.date) ?? [];
    list.push(article);
    byDay.set(article.date, list);
  }
  const articleRoot = el('div', { class: 'articles', 'data-testid': 'articles' });
  articleRoot.append(el('h3', {}, `articles (${articles.length})`));
  for (const [day, list] of [...byDay.entries()].sort()) {
    articleRoot.append(el('h4', {}, day));
    for (const article of list) {
      articleRoot.append(
        el(
          'div',
          { class: 'article' },
          el('strong', {}, article.headline),
          el('span', { class: 'outlet' }, ` — ${article.outlet}`),
          el('p', {}, article.snippet),
        ),
      );
    }
  }
  container.append(articleRoot);

  // decision form
  const label = el('input', {
    type: 'text',
    placeholder: 'descriptive label (required to validate)',
    'data-testid': 'label-input',
  });
  const note = el('textarea', { placeholder: 'note (optional)', 'data-testid': 'note-input' });
  const fieldError = el('div', { class: 'field-error', 'data-testid': 'label-error' });
  const validateBtn = el('button', { class: 'validate', 'data-testid': 'validate' }, 'validate (v)');
  const rejectBtn = el('button', { class: 'reject', 'data-testid': 'reject' }, 'reject (r)');

  const submit = async (verdict: 'validated' | 'rejected') => {
    fieldError.textContent = '';
    const body = { verdict, label: label.value, note: note.value };
    const clientError = session.validateInput(body);
    if (clientError) {
      fieldError.textContent = clientError;
      label.classList.add('invalid');
      return;
    }
    const outcome = await session.decide(summary.id, body);
    if (outcome.conflict) {
      // decided elsewhere: repaint in place so the conflict banner shows
      renderCandidate(container, detail, articles, session, handlers);
      return;
    }
    if (outcome.ok) handlers.onDecided();
    else if (outcome.message) fieldError.textContent = outcome.message;
  };
  validateBtn.addEventListener('click', () => void submit('validated'));
  rejectBtn.addEventListener('click', () => void submit('rejected'));

  const form = el(
    'div',
    { class: 'decision-form', 'data-testid': 'decision-form' },
    label,
    fieldError,
    note,
    el('div', { class: 'actions' }, validateBtn, rejectBtn),
  );
  container.append(form);

  // throughput shortcuts: v validate, r reject (when not typing a label)
  container.addEventListener('keydown', (event) => {
    const target = event.target as HTMLElement;
    const typing = target.tagName === 'INPUT' || target.tagName === 'TEXTAREA';
    if (typing) return;
    if (event.key === 'v') void submit('validated');
    if (event.key === 'r') void submit('rejected');
    if (event.key === 'Escape') handlers.onBack();
  });
}

export function renderStorms(container: HTMLElement, storms: CandidateRow[]): void {
  container.replaceChildren();
  container.append(el('h2', {}, `storms (${storms.length})`));
  const tbody = el('tbody');
  for (const storm of storms) {
    tbody.append(
      el(
        'tr',
        { 'data-testid': 'storm-row' },
        el('td', {}, storm.label),
        el('td', {}, `${storm.start} .. ${storm.end}`),
        el('td', {}, String(storm.iteration)),
      ),
    );
  }
  container.append(
    el(
      'table',
      { class: 'storms' },
      el('thead', {}, el('tr', {}, el('th', {}, 'label'), el('th', {}, 'window'), el('th', {}, 'iteration'))),
      tbody,
    ),
  );
}
