import { Panel } from './panel.js';

// service base is same-origin unless ?service=http://host:port is given
const base = new URLSearchParams(window.location.search).get('service') ?? '';

const root = document.getElementById('panel');
if (root) {
  Panel.mount(root, base).catch((err) => {
    root.textContent = `service unreachable: ${err instanceof Error ? err.message : err}`;
  });
}
