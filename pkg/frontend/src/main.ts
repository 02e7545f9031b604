/** App bootstrap: hash routing between the queue, candidate detail, and the
 * storms list, plus polling for background detection runs. */

import { ApiClient } from './api';
import { ReviewSession } from './state';
import { renderCandidate, renderQueue, renderStorms } from './views';

declare global {
  interface Window {
    STORMWATCH_API?: string;
  }
}

export function apiBase(): string {
  return window.STORMWATCH_API ?? '';
}

export async function startApp(root: HTMLElement): Promise<void> {
  const api = new ApiClient(apiBase());
  const status = document.createElement('div');
  status.className = 'app-status';
  const view = document.createElement('main');
  root.replaceChildren(status, view);

  const campaigns = await api.listCampaigns();
  if (campaigns.length === 0) {
    view.textContent = 'no campaigns yet — run a detection round first.';
    return;
  }
  const campaign = campaigns[0];
  const session = new ReviewSession(api, campaign.campaign_id);
  await session.load();

  const showStatus = (text: string) => {
    status.textContent = text;
  };
  showStatus(
    `${campaign.campaign_id} · iteration ${campaign.iteration} · ` +
      `${campaign.n_finalized} finalized · converged: ${campaign.converged}`,
  );

  const pollRun = async (runId: string) => {
    for (;;) {
      const run = await api.runStatus(runId);
      if (run.status === 'running') {
        const best = run.best ? ` best P=${run.best.precision.toFixed(2)} R=${run.best.recall.toFixed(2)}` : '';
        showStatus(`detection running: trial ${run.trials_done}/${run.n_trials}${best}`);
        await new Promise((resolve) => setTimeout(resolve, 1000));
        continue;
      }
      if (run.status === 'failed') showStatus(`run failed: ${run.error}`);
      else showStatus(`round ${run.iteration}: ${run.n_queued} new candidate(s) queued`);
      await session.load();
      route();
      return;
    }
  };

  const handlers = {
    onOpen: (candidateId: string) => {
      window.location.hash = `#/candidate/${encodeURIComponent(candidateId)}`;
    },
    onTriggerIteration: () => {
      void api
        .triggerIteration(campaign.campaign_id)
        .then((run) => pollRun(run.run_id))
        .catch((err) => showStatus(`could not start round: ${err.message}`));
    },
  };

  const route = async () => {
    const hash = window.location.hash;
    if (hash.startsWith('#/candidate/')) {
      const candidateId = decodeURIComponent(hash.slice('#/candidate/'.length));
      try {
        const [detail, articles] = await Promise.all([
          api.candidateDetail(candidateId),
          api.candidateArticles(candidateId),
        ]);
        renderCandidate(view, detail, articles.articles, session, {
          onDecided: () => {
            window.location.hash = '#/queue';
          },
          onBack: () => {
            window.location.hash = '#/queue';
          },
        });
      } catch (err) {
        view.textContent = `could not load candidate: ${(err as Error).message}`;
      }
      return;
    }
    if (hash.startsWith('#/storms')) {
      const payload = await api.storms();
      renderStorms(view, payload.storms);
      return;
    }
    renderQueue(view, session, handlers);
  };

  session.subscribe(() => {
    if (!window.location.hash || window.location.hash === '#/queue') void route();
  });
  window.addEventListener('hashchange', () => void route());
  await route();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  startApp(document.getElementById('app') as HTMLElement).catch((err) => {
    const root = document.getElementById('app');
    if (root) root.textContent = `failed to start: ${err.message}`;
  });
}
