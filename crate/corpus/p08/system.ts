vars s, u;
init s = 1 && u = 0;
next s' = s && (u' = s);
