/**
 * Entry point. The API base defaults to the page's own origin; pass
 * ?api=http://host:port to point the viewer at a service running elsewhere.
 * The rest of the query string is the view state, so the URL is the session.
 */

import { Api } from "./api.js";
import { SliceViewer } from "./controller.js";
import { bindViewer } from "./dom.js";
import { decodeViewState } from "./state.js";

const params = new URLSearchParams(location.search);
const api = new Api(params.get("api") ?? "");
const initial = decodeViewState(location.search);

const controller = bindViewer(document, (view) => new SliceViewer(api, view, initial));
void controller.start();
