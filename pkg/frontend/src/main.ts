/**
 * Browser entry point.  Configuration comes from URL parameters:
 *
 *     index.html?session=<id>[&server=ws://host:port]
 *
 * Without a `session` parameter a new one is created via the HTTP API.
 * The page shows the instruction banner, the attention marker, and the cost
 * bar; cursor X is captured from pointer/touch movement, normalized to the
 * window width, and streamed upstream at the frame cadence.
 */

import { SessionClient, Transport } from './client.js';
import { capturePointer } from './input.js';
import { barHeight, describeBanner, markerLeft } from './view.js';

function webSocketTransport(url: string): Transport {
  const ws = new WebSocket(url);
  let messageHandler: ((text: string) => void) | null = null;
  let closeHandler: (() => void) | null = null;
  const pending: string[] = [];
  ws.onopen = () => {
    for (const text of pending.splice(0)) ws.send(text);
  };
  ws.onmessage = (ev) => messageHandler?.(String(ev.data));
  ws.onclose = () => closeHandler?.();
  return {
    send: (text) => {
      if (ws.readyState === WebSocket.OPEN) ws.send(text);
      else pending.push(text);
    },
    close: () => ws.close(),
    onMessage: (h) => { messageHandler = h; },
    onClose: (h) => { closeHandler = h; },
  };
}

async function resolveSession(): Promise<{ id: string; wsUrl: string }> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get('server')
    ?? `${window.location.protocol === 'https:' ? 'wss' : 'ws'}://${window.location.host}`;
  const httpBase = server.replace(/^ws/, 'http');
  let id = params.get('session');
  if (!id) {
    const resp = await fetch(`${httpBase}/api/sessions`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ experiment: Number(params.get('experiment') ?? 2),
                             seed: Number(params.get('seed') ?? 0) }),
    });
    const body = await resp.json() as { id: string };
    id = body.id;
  }
  return { id, wsUrl: `${server}/ws/${id}` };
}

function buildDom() {
  document.body.innerHTML = `
    <div id="banner" style="font: 16px sans-serif; margin: 12px; text-align: center;"></div>
    <button id="start" style="display: block; margin: 0 auto;">Start</button>
    <div id="stage" style="position: relative; height: 70vh; margin: 12px; border: 1px solid #ccc;">
      <div id="bar" style="position: absolute; bottom: 0; left: 50%;
           transform: translateX(-50%); width: 80px; background: #000;"></div>
      <div id="marker" style="position: absolute; top: 0; width: 2px; height: 100%;
           background: #c33; display: none;"></div>
    </div>
    <form id="survey" style="display: none; margin: 12px; font: 14px sans-serif;"></form>
  `;
  return {
    banner: document.getElementById('banner') as HTMLDivElement,
    start: document.getElementById('start') as HTMLButtonElement,
    stage: document.getElementById('stage') as HTMLDivElement,
    bar: document.getElementById('bar') as HTMLDivElement,
    marker: document.getElementById('marker') as HTMLDivElement,
    survey: document.getElementById('survey') as HTMLFormElement,
  };
}

const SURVEY_ITEMS = [
  'Mental demand', 'Physical demand', 'Temporal demand',
  'Performance', 'Effort', 'Frustration',
];

function buildSurvey(form: HTMLFormElement, submit: (scores: number[], feedback: string) => void) {
  form.innerHTML = SURVEY_ITEMS.map((item, i) => `
    <label style="display:block; margin: 6px 0;">${item}
      <input type="range" min="-10" max="10" value="0" step="1" name="q${i}">
    </label>`).join('')
    + `<label style="display:block; margin: 6px 0;">Any feedback?
         <textarea name="feedback"></textarea></label>
       <button type="submit">Submit</button>`;
  form.onsubmit = (ev) => {
    ev.preventDefault();
    const data = new FormData(form);
    const scores = SURVEY_ITEMS.map((_, i) => Number(data.get(`q${i}`)));
    submit(scores, String(data.get('feedback') ?? ''));
    form.style.display = 'none';
  };
}

async function run() {
  const { id, wsUrl } = await resolveSession();
  const dom = buildDom();
  const client = new SessionClient(webSocketTransport(wsUrl), id);

  let latestX = 0;
  capturePointer(window, (x) => { latestX = x; });
  // stream the cursor upstream at the frame cadence
  window.setInterval(() => client.sendCursor(latestX), 1000 / 60);

  client.onView((view) => {
    dom.banner.textContent = describeBanner(view.banner);
    const stageHeight = dom.stage.clientHeight;
    dom.bar.style.height = `${view.display === null ? 0 : barHeight(view.display, stageHeight)}px`;
    if (view.target !== null) {
      dom.marker.style.display = 'block';
      dom.marker.style.left = `${markerLeft(view.target, dom.stage.clientWidth)}px`;
    } else {
      dom.marker.style.display = 'none';
    }
    dom.survey.style.display = view.banner.kind === 'survey' ? 'block' : 'none';
    dom.start.style.display = view.banner.kind === 'intro' ? 'block' : 'none';
  });

  buildSurvey(dom.survey, (scores, feedback) => client.submitSurvey(scores, feedback));
  dom.start.onclick = () => client.begin();
  client.hello();
}

run().catch((err) => {
  document.body.textContent = `failed to start session: ${err}`;
});
